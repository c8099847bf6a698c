use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChatModel, CompletionRequest, GatewayError};

/// One line of a replay store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub request_hash: String,
    pub messages_digest: String,
    pub response: String,
}

/// Wraps a model and appends every completed exchange to a JSONL store.
pub struct RecordingChat<M> {
    inner: M,
    sink: Mutex<Option<File>>,
    records: Mutex<Vec<ReplayRecord>>,
}

impl<M: ChatModel> RecordingChat<M> {
    /// Records in memory only.
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            sink: Mutex::new(None),
            records: Mutex::new(Vec::new()),
        }
    }

    /// Records in memory and appends to `path`.
    pub fn to_file(inner: M, path: &Path) -> Result<Self, GatewayError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GatewayError::Io(format!("{}: {e}", path.display())))?;
        Ok(Self {
            inner,
            sink: Mutex::new(Some(file)),
            records: Mutex::new(Vec::new()),
        })
    }

    pub fn records(&self) -> Vec<ReplayRecord> {
        self.records.lock().expect("records lock").clone()
    }
}

impl<M: ChatModel> ChatModel for RecordingChat<M> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let response = self.inner.complete(request)?;
        let record = ReplayRecord {
            request_hash: request.request_hash(),
            messages_digest: request.messages_digest(),
            response: response.clone(),
        };
        if let Some(file) = self.sink.lock().expect("sink lock").as_mut() {
            let line = serde_json::to_string(&record).expect("record serializes");
            writeln!(file, "{line}").map_err(|e| GatewayError::Io(e.to_string()))?;
        }
        self.records.lock().expect("records lock").push(record);
        Ok(response)
    }
}

/// Plays back recorded responses. Repeated identical requests receive their
/// recorded responses in the original order.
pub struct ReplayChat {
    by_hash: Mutex<HashMap<String, VecDeque<String>>>,
}

impl ReplayChat {
    pub fn from_records<I: IntoIterator<Item = ReplayRecord>>(records: I) -> Self {
        let mut by_hash: HashMap<String, VecDeque<String>> = HashMap::new();
        for r in records {
            by_hash.entry(r.request_hash).or_default().push_back(r.response);
        }
        Self {
            by_hash: Mutex::new(by_hash),
        }
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let file =
            File::open(path).map_err(|e| GatewayError::Io(format!("{}: {e}", path.display())))?;
        let mut records = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| GatewayError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ReplayRecord = serde_json::from_str(&line).map_err(|e| {
                GatewayError::Config(format!("{}:{}: {e}", path.display(), n + 1))
            })?;
            records.push(record);
        }
        Ok(Self::from_records(records))
    }
}

impl ChatModel for ReplayChat {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let hash = request.request_hash();
        self.by_hash
            .lock()
            .expect("replay lock")
            .get_mut(&hash)
            .and_then(VecDeque::pop_front)
            .ok_or(GatewayError::ReplayMiss(hash))
    }
}
