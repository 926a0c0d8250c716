use serde::Serialize;
use serde_json::{Map, Value};

pub enum Failure {
    /// Unreadable, malformed or unsupported input.
    Input(String),
}

#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub pass: bool,
    pub checked: usize,
    pub failed: usize,
}

/// The single JSON document written to stdout.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Value,
    pub seed: Option<u64>,
    pub instances: Vec<Value>,
    pub certificates: Map<String, Value>,
    pub timings: Timings,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(command: Value, seed: Option<u64>) -> Self {
        Self {
            command,
            seed,
            instances: Vec::new(),
            certificates: Map::new(),
            timings: Timings::default(),
            summary: Summary {
                pass: true,
                checked: 0,
                failed: 0,
            },
        }
    }

    pub fn record(&mut self, holds: bool) {
        self.summary.checked += 1;
        if !holds {
            self.summary.failed += 1;
            self.summary.pass = false;
        }
    }
}
