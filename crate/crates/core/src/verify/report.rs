use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub dependency: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NfReport {
    pub subject: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
}

impl NfReport {
    pub fn satisfied(subject: impl Into<String>) -> Self {
        NfReport {
            subject: subject.into(),
            verdict: Verdict::Satisfied,
            witnesses: vec![],
        }
    }

    /// Verdict follows the witnesses: violated iff there is at least one.
    pub fn from_witnesses(subject: impl Into<String>, witnesses: Vec<Witness>) -> Self {
        NfReport {
            subject: subject.into(),
            verdict: if witnesses.is_empty() {
                Verdict::Satisfied
            } else {
                Verdict::Violated
            },
            witnesses,
        }
    }

    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }

    pub fn witness(&mut self, dependency: impl Into<String>, reason: impl Into<String>) {
        self.witnesses.push(Witness {
            dependency: dependency.into(),
            reason: reason.into(),
        });
    }
}
