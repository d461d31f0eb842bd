//! JSON files for instances and angle schedules.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{ProblemInstance, ProblemKind};
use crate::schedule::{AngleSchedule, Provenance};

/// Expected layout of an angle file, quoted in schema errors.
pub const ANGLE_FILE_SCHEMA: &str =
    r#"{"kind": "maxcut"|"ec3", "p": int, "gamma": [float], "beta": [float], "provenance": {"method", "D", "budget", "seed"}}"#;

/// Expected layout of an instance file, quoted in schema errors.
pub const INSTANCE_FILE_SCHEMA: &str = r#"{"kind": "maxcut", "n", "seed", "edge_prob", "adjacency": [[0|1]]} or {"kind": "ec3", "n", "seed", "clauses": [[a, b, c]]}, optional "certificate": {"energy", "witness", "exact"}"#;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleFile {
    pub kind: ProblemKind,
    pub p: usize,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl AngleFile {
    pub fn new(kind: ProblemKind, schedule: &AngleSchedule) -> Self {
        Self {
            kind,
            p: schedule.p(),
            gamma: schedule.gamma.clone(),
            beta: schedule.beta.clone(),
            provenance: schedule.provenance.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.len() != self.p {
            return Err(Error::schema("gamma", format!("expected {} entries, found {}", self.p, self.gamma.len())));
        }
        if self.beta.len() != self.p {
            return Err(Error::schema("beta", format!("expected {} entries, found {}", self.p, self.beta.len())));
        }
        self.schedule().validate()
    }

    pub fn schedule(&self) -> AngleSchedule {
        AngleSchedule {
            gamma: self.gamma.clone(),
            beta: self.beta.clone(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AngleFile = serde_json::from_str(text).map_err(|e| schema_error(&e, ANGLE_FILE_SCHEMA))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| missing(path, e, ANGLE_FILE_SCHEMA))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json()?)
    }
}

fn missing(path: &Path, e: std::io::Error, schema: &str) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}; expected a JSON file of the form {schema}", path.display()),
    ))
}

/// Turns a serde error into a schema error naming the offending field.
fn schema_error(e: &serde_json::Error, schema: &str) -> Error {
    let msg = e.to_string();
    let field = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("field"))
        .unwrap_or("<document>")
        .to_string();
    Error::schema(field, format!("{msg}; expected {schema}"))
}

pub fn instance_from_json(text: &str) -> Result<ProblemInstance> {
    let inst: ProblemInstance = serde_json::from_str(text).map_err(|e| schema_error(&e, INSTANCE_FILE_SCHEMA))?;
    inst.validate()?;
    Ok(inst)
}

pub fn instance_to_json(inst: &ProblemInstance) -> Result<String> {
    Ok(serde_json::to_string_pretty(inst)? + "\n")
}

pub fn read_instance(path: &Path) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path).map_err(|e| missing(path, e, INSTANCE_FILE_SCHEMA))?;
    instance_from_json(&text)
}

pub fn write_instance(path: &Path, inst: &ProblemInstance) -> Result<()> {
    write_text(path, &instance_to_json(inst)?)
}

/// Instance files in `dir` (`*.json`), sorted by file name.
pub fn read_instance_dir(dir: &Path) -> Result<Vec<ProblemInstance>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_instance(p)).collect()
}

/// Instances from a file or a directory of files.
pub fn read_instances(path: &Path) -> Result<Vec<ProblemInstance>> {
    if path.is_dir() {
        read_instance_dir(path)
    } else {
        Ok(vec![read_instance(path)?])
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}
