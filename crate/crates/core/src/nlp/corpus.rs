use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::NlpError;

/// One message: `{"user_id", "tweet_id", "text"}` on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub user_id: String,
    #[serde(rename = "tweet_id")]
    pub message_id: String,
    pub text: String,
}

/// Messages with unique ids, plus the set of users known to be outside the
/// graph (their messages are ignored downstream).
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    messages: Vec<Message>,
    index: HashMap<String, usize>,
    external: BTreeSet<String>,
}

impl Corpus {
    pub fn new(messages: Vec<Message>) -> Result<Self, NlpError> {
        let mut index = HashMap::with_capacity(messages.len());
        for (i, m) in messages.iter().enumerate() {
            if index.insert(m.message_id.clone(), i).is_some() {
                return Err(NlpError::DuplicateId(m.message_id.clone()));
            }
        }
        Ok(Self { messages, index, external: BTreeSet::new() })
    }

    /// Parse one JSON object per line; blank lines are skipped.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, NlpError> {
        let mut messages = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let m: Message =
                serde_json::from_str(&line).map_err(|e| NlpError::Corpus { line: i + 1, message: e.to_string() })?;
            messages.push(m);
        }
        Self::new(messages)
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<(), NlpError> {
        for m in &self.messages {
            serde_json::to_writer(&mut writer, m).map_err(|e| NlpError::Corpus { line: 0, message: e.to_string() })?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn get(&self, message_id: &str) -> Option<&Message> {
        self.index.get(message_id).map(|&i| &self.messages[i])
    }

    /// Message indices grouped by user, users in id order.
    pub fn by_user(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, m) in self.messages.iter().enumerate() {
            out.entry(m.user_id.as_str()).or_default().push(i);
        }
        out
    }

    pub fn flag_external(&mut self, user_id: &str) {
        self.external.insert(user_id.to_string());
    }

    pub fn is_external(&self, user_id: &str) -> bool {
        self.external.contains(user_id)
    }

    pub fn external_users(&self) -> &BTreeSet<String> {
        &self.external
    }
}
