use serde::{Deserialize, Serialize};

/// Protocol phase an entry belongs to. Variants are in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Prepare,
    Propagate,
    Measure,
    Correct,
    Select,
    Distill,
    Teleport,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub from: String,
    pub to: String,
    pub payload: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub step: usize,
    pub stage: Stage,
    pub node: String,
    pub instruction: String,
    pub registers: Vec<String>,
    /// Gate parameter: coefficient of a controlled add, exponent of a phase or shift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
}

/// Ordered log of gates, transmissions, measurements and classical messages.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<Entry>,
}

impl Transcript {
    pub(crate) fn push(
        &mut self,
        stage: Stage,
        node: &str,
        instruction: &str,
        registers: Vec<String>,
    ) -> &mut Entry {
        let step = self.entries.len();
        self.entries.push(Entry {
            step,
            stage,
            node: node.to_string(),
            instruction: instruction.to_string(),
            registers,
            value: None,
            outcome: None,
            message: None,
        });
        self.entries.last_mut().expect("just pushed")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose stage is at most `last`.
    pub fn through(&self, last: Stage) -> &[Entry] {
        let end = self
            .entries
            .iter()
            .position(|e| e.stage > last)
            .unwrap_or(self.entries.len());
        &self.entries[..end]
    }

    pub fn count(&self, instruction: &str) -> usize {
        self.entries
            .iter()
            .filter(|e| e.instruction == instruction)
            .count()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().filter_map(|e| {
            e.outcome
                .map(|y| (e.registers.first().map(String::as_str).unwrap_or(""), y))
        })
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        lines(&self.entries)
    }
}

pub fn lines(entries: &[Entry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("entry serializes"));
        out.push('\n');
    }
    out
}
