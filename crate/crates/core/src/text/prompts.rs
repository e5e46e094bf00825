//! Prompt templates sent to the sentence generator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    IdealGen,
    ResembleInit,
    Mediator1,
    Mediator2,
    Mediator3,
    Mediator4,
    Mediator5,
}

impl TemplateId {
    pub const ALL: [TemplateId; 7] = [
        TemplateId::IdealGen,
        TemplateId::ResembleInit,
        TemplateId::Mediator1,
        TemplateId::Mediator2,
        TemplateId::Mediator3,
        TemplateId::Mediator4,
        TemplateId::Mediator5,
    ];

    pub fn template(self) -> PromptTemplate {
        PromptTemplate::for_id(self)
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("unknown"))
    }
}

/// Values substituted into `{T}`, `{Y}`, `{Z}`, `{s1}` and `{s2}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBindings {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub topic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sentence: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub second: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub message: &'static str,
    pub pattern: &'static str,
}

const GENERATOR_MESSAGE: &str = "You are a helpful assistant.";

const MEDIATOR1_MESSAGE: &str = "You are a mediator trying to find agreed wording for how to deal with {Y} based on existing sentences. Give a straightforward answer with no introduction to help people reach an agreed wording of a coherent sentence.";
const MEDIATOR1_PROMPT: &str = "Generate {T} possible different well-structured sentences that aggregate the following two sentences. Make sure each sentence has at most 15 words. Number your answers (i.e., 1), 2), 3), 4), 5), and so on) for each sentence you propose.\n\nSentence 1: {s1}\nSentence 2: {s2}";

const MEDIATOR2_MESSAGE: &str = "As a mediator, you need to find a consensus on {Y} solutions. Provide straightforward and numbered suggestions to help reach a clear and agreed-upon sentence.";
const MEDIATOR2_PROMPT: &str = "Generate {T} concise and clear sentences that blend the following two sentences into one coherent idea:\nEnsure each sentence is no longer than 15 words. Number your answers (i.e., 1), 2), 3), 4), 5), and so on) for each sentence you propose.\n\nSentence 1: {s1}\nSentence 2: {s2}";

const MEDIATOR3_MESSAGE: &str = "You are acting as a mediator to achieve a common statement on {Y}. Give direct and numbered suggestions to assist in forming a unified and coherent sentence.";
const MEDIATOR3_PROMPT: &str = "Create {T} unique, well-structured sentences that combine these two sentences into one unified thought:\nEach sentence should be a maximum of 15 words. Number your answers (i.e., 1), 2), 3), 4), 5), and so on) for each sentence you propose.\n\nSentence 1: {s1}\nSentence 2: {s2}";

impl PromptTemplate {
    pub fn for_id(id: TemplateId) -> Self {
        let (message, pattern) = match id {
            TemplateId::IdealGen => (
                GENERATOR_MESSAGE,
                "Give me {T} different sentences that are well structured about how to deal with {Y} with at most of 15 words",
            ),
            TemplateId::ResembleInit => (
                GENERATOR_MESSAGE,
                "Give me a well-structured sentence with a maximum of 15 words, resembling this sentence: {Z}",
            ),
            TemplateId::Mediator1 | TemplateId::Mediator4 => (MEDIATOR1_MESSAGE, MEDIATOR1_PROMPT),
            TemplateId::Mediator2 => (MEDIATOR2_MESSAGE, MEDIATOR2_PROMPT),
            TemplateId::Mediator3 => (MEDIATOR3_MESSAGE, MEDIATOR3_PROMPT),
            TemplateId::Mediator5 => (
                "You are a mediator.",
                "Give me one completely random well-structured sentence of at most 15 words.",
            ),
        };
        PromptTemplate { id, message, pattern }
    }

    /// Renders `(system message, user prompt)`.
    pub fn render(&self, bindings: &PromptBindings) -> Result<(String, String)> {
        Ok((fill(self.message, bindings)?, fill(self.pattern, bindings)?))
    }
}

fn fill(pattern: &str, b: &PromptBindings) -> Result<String> {
    let count = b.count.map(|c| c.to_string());
    let slots: [(&str, Option<&str>); 5] = [
        ("{T}", count.as_deref()),
        ("{Y}", b.topic.as_deref()),
        ("{Z}", b.sentence.as_deref()),
        ("{s1}", b.first.as_deref()),
        ("{s2}", b.second.as_deref()),
    ];
    let mut out = pattern.to_string();
    for (slot, value) in slots {
        if out.contains(slot) {
            let value = value.ok_or_else(|| Error::Config(format!("prompt placeholder {slot} is unbound")))?;
            out = out.replace(slot, value);
        }
    }
    Ok(out)
}
