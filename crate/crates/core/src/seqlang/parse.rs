use thiserror::Error;

use super::SeqToken;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("token {index} ({token:?}): {msg}")]
pub struct SeqParseError {
    /// Zero-based position of the offending token.
    pub index: usize,
    pub token: String,
    pub msg: String,
}

const RESERVED: [char; 4] = ['?', '!', '<', '>'];

/// Parse sequence text into tokens. Whitespace separates tokens; at most one
/// trailing marker (`?` or `!`) per token; `<wbinvd>` is the only bracketed
/// form.
pub fn parse_sequence(text: &str) -> Result<Vec<SeqToken>, SeqParseError> {
    let mut tokens = Vec::new();
    for (index, word) in text.split_whitespace().enumerate() {
        let err = |msg: &str| SeqParseError {
            index,
            token: word.to_owned(),
            msg: msg.to_owned(),
        };
        if word == "<wbinvd>" {
            tokens.push(SeqToken::Wbinvd);
            continue;
        }
        let (name, token) = if let Some(name) = word.strip_suffix('?') {
            (name, SeqToken::measured(name))
        } else if let Some(name) = word.strip_suffix('!') {
            (name, SeqToken::flush(name))
        } else {
            (word, SeqToken::access(word))
        };
        if name.is_empty() {
            return Err(err("empty block name"));
        }
        if name.contains(RESERVED) {
            return Err(err("block names may not contain '?', '!', '<' or '>'"));
        }
        tokens.push(token);
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqlang::format_sequence;

    #[test]
    fn parses_the_reference_sequence() {
        let tokens = parse_sequence("A <wbinvd> B0 B0? B1! A?").unwrap();
        assert_eq!(
            tokens,
            vec![
                SeqToken::access("A"),
                SeqToken::Wbinvd,
                SeqToken::access("B0"),
                SeqToken::measured("B0"),
                SeqToken::flush("B1"),
                SeqToken::measured("A"),
            ]
        );
    }

    #[test]
    fn empty_text_is_an_empty_sequence() {
        assert_eq!(parse_sequence("").unwrap(), vec![]);
        assert_eq!(parse_sequence("  \n\t ").unwrap(), vec![]);
    }

    #[test]
    fn rejects_double_suffix() {
        let err = parse_sequence("B0?!").unwrap_err();
        assert_eq!(err.index, 0);
        // `B0?!` strips the `!` and leaves `B0?`, which is not a valid name.
        assert!(err.msg.contains("may not contain"));
        assert!(parse_sequence("B0!?").is_err());
    }

    #[test]
    fn rejects_bare_markers_and_brackets() {
        assert!(parse_sequence("?").is_err());
        assert!(parse_sequence("!").is_err());
        assert!(parse_sequence("<wbinvd>?").is_err());
        assert!(parse_sequence("a<b").is_err());
    }

    #[test]
    fn reports_token_position() {
        let err = parse_sequence("A B C ?!").unwrap_err();
        assert_eq!(err.index, 3);
    }

    #[test]
    fn round_trips_through_display() {
        let text = "A <wbinvd> B0 B0? B1! A?";
        let tokens = parse_sequence(text).unwrap();
        assert_eq!(format_sequence(&tokens), text);
    }
}
