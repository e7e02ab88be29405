use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One performance event: a name plus an opaque encoding string, if any.
/// Encodings are carried through untouched; only hardware backends care.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    pub encoding: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventConfig {
    pub events: Vec<Event>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EventConfigError {
    #[error("line {line}: duplicate event name {name:?}")]
    Duplicate { line: usize, name: String },
}

/// Parse an event configuration: one event per line — a name optionally
/// followed by whitespace and an encoding — with `#` comments and blank
/// lines ignored.
pub fn parse_event_config(text: &str) -> Result<EventConfig, EventConfigError> {
    let mut events: Vec<Event> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (name, encoding) = match content.split_once(char::is_whitespace) {
            Some((name, rest)) => (name.to_owned(), Some(rest.trim().to_owned())),
            None => (content.to_owned(), None),
        };
        if events.iter().any(|e| e.name == name) {
            return Err(EventConfigError::Duplicate { line, name });
        }
        events.push(Event { name, encoding });
    }
    Ok(EventConfig { events })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_event_names() {
        let cfg = parse_event_config("UOPS_ISSUED.ANY\nMEM_LOAD_RETIRED.L1_HIT").unwrap();
        assert_eq!(cfg.events.len(), 2);
        assert_eq!(cfg.events[0].name, "UOPS_ISSUED.ANY");
        assert_eq!(cfg.events[0].encoding, None);
    }

    #[test]
    fn empty_text_is_an_empty_config() {
        assert_eq!(parse_event_config("").unwrap().events.len(), 0);
    }

    #[test]
    fn comments_and_encodings() {
        let cfg = parse_event_config("# comment\nE1 0x0E").unwrap();
        assert_eq!(cfg.events.len(), 1);
        assert_eq!(cfg.events[0].encoding.as_deref(), Some("0x0E"));
    }

    #[test]
    fn duplicates_are_rejected_with_line_number() {
        let err = parse_event_config("E1\n\nE1 0x2").unwrap_err();
        assert_eq!(
            err,
            EventConfigError::Duplicate {
                line: 3,
                name: "E1".to_owned()
            }
        );
    }
}
