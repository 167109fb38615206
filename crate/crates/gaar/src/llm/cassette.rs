//! Cassette files: line-delimited JSON records of (key hash, request
//! snapshot, response text, usage). A replay backend serves recorded
//! responses by key and errors on cache miss rather than calling out.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Backend, CompletionRequest, CompletionResponse, DecodingParams, LlmError, Usage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteRecord {
    pub key: String,
    pub template: String,
    pub bindings: BTreeMap<String, String>,
    pub model: String,
    pub params: DecodingParams,
    pub response: String,
    pub usage: Usage,
}

/// Appends records to a cassette file, redacting any configured secret from
/// every string field before it reaches disk.
pub struct CassetteWriter {
    path: PathBuf,
    out: BufWriter<File>,
    secrets: Vec<String>,
}

impl CassetteWriter {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self, LlmError> {
        Self::with_secrets(path, Vec::new())
    }

    pub fn with_secrets(path: impl Into<PathBuf>, secrets: Vec<String>) -> Result<Self, LlmError> {
        let path = path.into();
        let file = File::create(&path).map_err(|e| LlmError::CassetteIo(e.to_string()))?;
        Ok(CassetteWriter {
            path,
            out: BufWriter::new(file),
            secrets: secrets.into_iter().filter(|s| !s.is_empty()).collect(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn scrub(&self, text: &str) -> String {
        let mut out = text.to_string();
        for secret in &self.secrets {
            out = out.replace(secret, "[REDACTED]");
        }
        out
    }

    pub fn append(
        &mut self,
        req: &CompletionRequest,
        resp: &CompletionResponse,
    ) -> Result<(), LlmError> {
        let record = CassetteRecord {
            key: req.cache_key(),
            template: self.scrub(&req.template),
            bindings: req
                .bindings
                .iter()
                .map(|(k, v)| (k.clone(), self.scrub(v)))
                .collect(),
            model: self.scrub(&req.model),
            params: req.params.clone(),
            response: self.scrub(&resp.text),
            usage: resp.usage.clone(),
        };
        let line =
            serde_json::to_string(&record).map_err(|e| LlmError::CassetteIo(e.to_string()))?;
        writeln!(self.out, "{line}").map_err(|e| LlmError::CassetteIo(e.to_string()))?;
        self.out
            .flush()
            .map_err(|e| LlmError::CassetteIo(e.to_string()))
    }
}

/// Serves recorded responses by request key. Repeated identical requests
/// consume the recorded occurrences in order; the last one is sticky.
pub struct ReplayBackend {
    entries: HashMap<String, Vec<CassetteRecord>>,
    cursors: Mutex<HashMap<String, usize>>,
}

impl ReplayBackend {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let file = File::open(path.as_ref()).map_err(|e| {
            LlmError::CassetteIo(format!("{}: {e}", path.as_ref().display()))
        })?;
        let mut entries: HashMap<String, Vec<CassetteRecord>> = HashMap::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| LlmError::CassetteIo(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: CassetteRecord = serde_json::from_str(&line).map_err(|e| {
                LlmError::CassetteIo(format!("cassette line {}: {e}", lineno + 1))
            })?;
            entries.entry(record.key.clone()).or_default().push(record);
        }
        Ok(ReplayBackend {
            entries,
            cursors: Mutex::new(HashMap::new()),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Backend for ReplayBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let key = req.cache_key();
        let Some(records) = self.entries.get(&key) else {
            return Err(LlmError::CacheMiss {
                key,
                template: req.template.clone(),
            });
        };
        let mut cursors = self.cursors.lock().unwrap();
        let cursor = cursors.entry(key).or_insert(0);
        let record = &records[(*cursor).min(records.len() - 1)];
        *cursor += 1;
        Ok(CompletionResponse {
            text: record.response.clone(),
            usage: record.usage.clone(),
            latency_ms: 0,
        })
    }

    fn mode(&self) -> &'static str {
        "replay"
    }
}
