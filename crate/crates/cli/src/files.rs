//! Instance / schedule / trace files: UTF-8 JSON with a fixed field order so
//! rewriting a parsed file is byte-identical.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use calsched::domain::{Instance, Schedule};
use calsched::simulator::SimulationTrace;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug)]
pub enum FileError {
    Io { path: PathBuf, message: String },
    Parse { path: PathBuf, message: String },
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FileError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            FileError::Parse { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for FileError {}

fn render<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    text.push('\n');
    text
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    fs::write(path, render(value)).map_err(|e| FileError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = fs::read_to_string(path).map_err(|e| FileError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| FileError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn instance_to_string(instance: &Instance) -> String {
    render(instance)
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<(), FileError> {
    write_json(path, instance)
}

pub fn read_instance(path: &Path) -> Result<Instance, FileError> {
    read_json(path)
}

pub fn write_schedule(path: &Path, schedule: &Schedule) -> Result<(), FileError> {
    write_json(path, schedule)
}

pub fn read_schedule(path: &Path) -> Result<Schedule, FileError> {
    read_json(path)
}

pub fn write_trace(path: &Path, trace: &SimulationTrace) -> Result<(), FileError> {
    write_json(path, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use calsched::domain::Job;

    #[test]
    fn instance_round_trip_is_byte_identical() {
        let instance = Instance::new(1, 9, vec![Job::new(0, 0, 4), Job::new(1, 2, 5)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        write_instance(&path, &instance).unwrap();
        let first = fs::read(&path).unwrap();
        let reread = read_instance(&path).unwrap();
        assert_eq!(reread, instance);
        write_instance(&path, &reread).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
    }

    #[test]
    fn missing_field_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        fs::write(&path, r#"{"T": 3, "jobs": []}"#).unwrap();
        let err = read_instance(&path).unwrap_err();
        let message = err.to_string();
        assert!(
            message.contains("lambda"),
            "diagnostic must name the missing field: {message}"
        );
    }

    #[test]
    fn non_integer_field_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        fs::write(&path, r#"{"lambda": 1.5, "T": 3, "jobs": []}"#).unwrap();
        assert!(matches!(read_instance(&path), Err(FileError::Parse { .. })));
    }

    #[test]
    fn parsing_succeeds_where_validation_fails() {
        // An out-of-window assignment parses fine; validation decides.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sched.json");
        fs::write(
            &path,
            r#"{"calibrations": [{"start": 0}], "assignments": [{"job": 0, "calibration": 0, "t": 99}]}"#,
        )
        .unwrap();
        let schedule = read_schedule(&path).unwrap();
        let instance = Instance::new(1, 3, vec![Job::new(0, 0, 2)]);
        assert!(!calsched::validate_schedule(&instance, &schedule).is_ok());
    }
}
