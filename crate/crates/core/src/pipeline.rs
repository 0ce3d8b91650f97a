//! Prompt, call and parse over a list of pairs.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::analysis::{parse_output, DetectionResult, ParseStatus};
use crate::error::{Error, FixtureMiss, Result};
use crate::extraction::CodeDocPair;
use crate::llm_client::{ChatClient, ChatRequest, ClientError};
use crate::prompting::{build_system_prompt, build_user_prompt, ProjectMeta, PromptVariant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectConfig {
    pub variant: PromptVariant,
    pub project: ProjectMeta,
    pub model: String,
    /// Worker threads. Live requests are further bounded by the client's
    /// process-wide in-flight limit.
    pub concurrency: usize,
}

/// The exact request sent for one pair. Temperature stays at 0.
pub fn request_for(pair: &CodeDocPair, variant: PromptVariant, project: &ProjectMeta, model: &str) -> ChatRequest {
    ChatRequest::new(model, build_system_prompt(variant, project), build_user_prompt(pair))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectTally {
    pub pairs: usize,
    pub flagged: usize,
    pub malformed: usize,
}

pub fn tally(results: &[DetectionResult]) -> DetectTally {
    DetectTally {
        pairs: results.len(),
        flagged: results.iter().filter(|r| r.is_flagged()).count(),
        malformed: results
            .iter()
            .filter(|r| r.parse_status == ParseStatus::Malformed)
            .count(),
    }
}

/// Runs every pair through the model and parser. Output order matches
/// input order. Replay misses are gathered and reported together; any
/// other client failure aborts with the first one in pair order.
pub fn detect(pairs: &[CodeDocPair], config: &DetectConfig, client: &ChatClient) -> Result<Vec<DetectionResult>> {
    let system = build_system_prompt(config.variant, &config.project);
    let slots: Vec<Mutex<Option<std::result::Result<String, ClientError>>>> =
        pairs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = config.concurrency.clamp(1, pairs.len().max(1));

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(pair) = pairs.get(i) else { break };
                let request = ChatRequest::new(config.model.as_str(), system.as_str(), build_user_prompt(pair));
                let outcome = client.complete(&request).map(|r| r.raw_text);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(outcome);
            });
        }
    });

    let mut results = Vec::with_capacity(pairs.len());
    let mut misses = Vec::new();
    for (pair, slot) in pairs.iter().zip(slots) {
        let outcome = slot
            .into_inner()
            .unwrap_or_else(|e| e.into_inner())
            .expect("every slot is filled");
        match outcome {
            Ok(raw) => results.push(parse_output(&raw, config.variant, &pair.pair_id)),
            Err(ClientError::FixtureMiss { key }) => misses.push(FixtureMiss {
                pair_id: pair.pair_id.clone(),
                key,
            }),
            Err(source) if misses.is_empty() => {
                return Err(Error::Transport {
                    pair_id: pair.pair_id.clone(),
                    source,
                })
            }
            Err(_) => {}
        }
    }
    if !misses.is_empty() {
        return Err(Error::FixtureMiss(misses));
    }
    Ok(results)
}
