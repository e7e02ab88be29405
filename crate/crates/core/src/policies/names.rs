//! The policy-name grammar.
//!
//! Canonical names:
//!
//! ```text
//! FIFO | LRU | PLRU | MRU | MRU* | NRU | LRU3PLRU4
//! QLRU_H<x><y>_(M<x>|MR<p>-<x>)_R<r>_U<u>[_UMO]
//! PERM{v0|v1|...|vA}                    (A hit vectors, then the miss vector)
//! ADAPTIVE{a=<spec>;b=<spec>;leaders_a=<sets>;leaders_b=<sets>;psel_bits=<n>}
//! ```
//!
//! Set lists are comma-separated indices or `lo-hi` ranges; an empty list is
//! written as nothing. Probabilistic insertion `MR<p>-<x>` is the ASCII
//! rendering of the subscript notation (the dash separates `p` from `x`
//! because underscores already delimit fields).

use std::fmt::Write as _;

use thiserror::Error;

use super::adaptive::AdaptiveConfig;
use super::permutation::PermutationVectors;
use super::qlru::{validate_qlru_config, InsertionAge, QlruConfig, QlruReplace, QlruUpdate, QlruValidationError};
use super::PolicySpec;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyNameError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Invalid(#[from] QlruValidationError),
}

fn syntax(pos: usize, msg: impl Into<String>) -> PolicyNameError {
    PolicyNameError::Syntax {
        pos,
        msg: msg.into(),
    }
}

/// Parse a policy name. Rejects both malformed names and well-formed names
/// describing invalid parameter combinations (e.g. `R0` with `U2`).
pub fn parse_policy_name(text: &str) -> Result<PolicySpec, PolicyNameError> {
    let text = text.trim();
    match text {
        "FIFO" => return Ok(PolicySpec::Fifo),
        "LRU" => return Ok(PolicySpec::Lru),
        "PLRU" => return Ok(PolicySpec::Plru),
        "MRU" => return Ok(PolicySpec::Mru),
        "MRU*" => return Ok(PolicySpec::MruStar),
        "NRU" => return Ok(PolicySpec::Nru),
        "LRU3PLRU4" => return Ok(PolicySpec::Lru3Plru4),
        _ => {}
    }
    if let Some(rest) = text.strip_prefix("QLRU_") {
        return parse_qlru(rest).map(PolicySpec::Qlru);
    }
    if let Some(rest) = text.strip_prefix("PERM{") {
        let body = rest
            .strip_suffix('}')
            .ok_or_else(|| syntax(text.len(), "expected closing '}'"))?;
        return parse_perm(body).map(PolicySpec::Permutation);
    }
    if let Some(rest) = text.strip_prefix("ADAPTIVE{") {
        let body = rest
            .strip_suffix('}')
            .ok_or_else(|| syntax(text.len(), "expected closing '}'"))?;
        return parse_adaptive(body).map(PolicySpec::Adaptive);
    }
    Err(syntax(0, format!("unknown policy name {text:?}")))
}

fn parse_qlru(rest: &str) -> Result<QlruConfig, PolicyNameError> {
    let mut fields: Vec<&str> = rest.split('_').collect();
    let umo = if fields.last() == Some(&"UMO") {
        fields.pop();
        true
    } else {
        false
    };
    if fields.len() != 4 {
        return Err(syntax(0, "expected QLRU_H<xy>_M<x>_R<r>_U<u>[_UMO]"));
    }

    let h = fields[0]
        .strip_prefix('H')
        .ok_or_else(|| syntax(5, "expected H field"))?;
    let digits: Vec<u8> = h
        .chars()
        .map(|c| c.to_digit(10).map(|d| d as u8))
        .collect::<Option<_>>()
        .ok_or_else(|| syntax(5, "H field takes two digits"))?;
    let [hit_x, hit_y] = digits[..] else {
        return Err(syntax(5, "H field takes two digits"));
    };

    let insertion = if let Some(mr) = fields[1].strip_prefix("MR") {
        let (p, x) = mr
            .split_once('-')
            .ok_or_else(|| syntax(0, "expected MR<p>-<x>"))?;
        let p: u32 = p.parse().map_err(|_| syntax(0, "bad MR probability"))?;
        let x: u8 = x.parse().map_err(|_| syntax(0, "bad MR age"))?;
        InsertionAge::Probabilistic { p, x }
    } else if let Some(m) = fields[1].strip_prefix('M') {
        let x: u8 = m.parse().map_err(|_| syntax(0, "bad insertion age"))?;
        InsertionAge::Fixed(x)
    } else {
        return Err(syntax(0, "expected M or MR field"));
    };

    let replace = match fields[2] {
        "R0" => QlruReplace::R0,
        "R1" => QlruReplace::R1,
        "R2" => QlruReplace::R2,
        other => return Err(syntax(0, format!("bad replace field {other:?}"))),
    };
    let update = match fields[3] {
        "U0" => QlruUpdate::U0,
        "U1" => QlruUpdate::U1,
        "U2" => QlruUpdate::U2,
        "U3" => QlruUpdate::U3,
        other => return Err(syntax(0, format!("bad update field {other:?}"))),
    };

    let cfg = QlruConfig {
        hit_x,
        hit_y,
        insertion,
        replace,
        update,
        umo,
    };
    validate_qlru_config(&cfg)?;
    Ok(cfg)
}

fn parse_perm(body: &str) -> Result<PermutationVectors, PolicyNameError> {
    let mut vectors = Vec::new();
    for part in body.split('|') {
        let vec: Vec<u8> = part
            .split(',')
            .map(|n| n.trim().parse::<u8>())
            .collect::<Result<_, _>>()
            .map_err(|_| syntax(0, "bad permutation entry"))?;
        vectors.push(vec);
    }
    if vectors.len() < 2 {
        return Err(syntax(0, "PERM needs A hit vectors plus a miss vector"));
    }
    let miss = vectors.pop().expect("nonempty");
    Ok(PermutationVectors::new(vectors, miss))
}

fn parse_adaptive(body: &str) -> Result<AdaptiveConfig, PolicyNameError> {
    let mut policy_a = None;
    let mut policy_b = None;
    let mut leaders_a = None;
    let mut leaders_b = None;
    let mut psel_bits = super::adaptive::DEFAULT_PSEL_BITS;
    for field in body.split(';') {
        let field = field.trim();
        if field.is_empty() {
            continue;
        }
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| syntax(0, format!("expected key=value, got {field:?}")))?;
        let value = value.trim();
        match key.trim() {
            "a" => policy_a = Some(parse_policy_name(value)?),
            "b" => policy_b = Some(parse_policy_name(value)?),
            "leaders_a" => leaders_a = Some(parse_set_list(value)?),
            "leaders_b" => leaders_b = Some(parse_set_list(value)?),
            "psel_bits" => {
                psel_bits = value
                    .parse()
                    .map_err(|_| syntax(0, "bad psel_bits value"))?
            }
            other => return Err(syntax(0, format!("unknown adaptive field {other:?}"))),
        }
    }
    let policy_a = policy_a.ok_or_else(|| syntax(0, "adaptive policy needs field a"))?;
    let policy_b = policy_b.ok_or_else(|| syntax(0, "adaptive policy needs field b"))?;
    Ok(AdaptiveConfig::new(
        policy_a,
        policy_b,
        leaders_a.unwrap_or_default(),
        leaders_b.unwrap_or_default(),
        psel_bits,
    ))
}

/// Parse a set list: comma-separated indices or `lo-hi` ranges.
pub fn parse_set_list(text: &str) -> Result<Vec<usize>, PolicyNameError> {
    let mut sets = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = item.split_once('-') {
            let lo: usize = lo.trim().parse().map_err(|_| syntax(0, "bad range start"))?;
            let hi: usize = hi.trim().parse().map_err(|_| syntax(0, "bad range end"))?;
            if hi < lo {
                return Err(syntax(0, format!("empty range {item:?}")));
            }
            sets.extend(lo..=hi);
        } else {
            sets.push(item.parse().map_err(|_| syntax(0, "bad set index"))?);
        }
    }
    Ok(sets)
}

/// Render a set list canonically: sorted, with runs of three or more
/// collapsed to `lo-hi`.
pub fn format_set_list(sets: &[usize]) -> String {
    let mut sets = sets.to_vec();
    sets.sort_unstable();
    sets.dedup();
    let mut out = String::new();
    let mut i = 0;
    while i < sets.len() {
        let start = sets[i];
        let mut j = i;
        while j + 1 < sets.len() && sets[j + 1] == sets[j] + 1 {
            j += 1;
        }
        if !out.is_empty() {
            out.push(',');
        }
        if j - i >= 2 {
            let _ = write!(out, "{}-{}", start, sets[j]);
        } else {
            let _ = write!(out, "{}", start);
            if j > i {
                let _ = write!(out, ",{}", sets[j]);
            }
        }
        i = j + 1;
    }
    out
}

/// Canonical name of a policy; `parse_policy_name` inverts it.
pub fn format_policy_name(spec: &PolicySpec) -> String {
    match spec {
        PolicySpec::Fifo => "FIFO".to_owned(),
        PolicySpec::Lru => "LRU".to_owned(),
        PolicySpec::Plru => "PLRU".to_owned(),
        PolicySpec::Mru => "MRU".to_owned(),
        PolicySpec::MruStar => "MRU*".to_owned(),
        PolicySpec::Nru => "NRU".to_owned(),
        PolicySpec::Lru3Plru4 => "LRU3PLRU4".to_owned(),
        PolicySpec::Qlru(cfg) => {
            let insertion = match cfg.insertion {
                InsertionAge::Fixed(x) => format!("M{x}"),
                InsertionAge::Probabilistic { p, x } => format!("MR{p}-{x}"),
            };
            let r = match cfg.replace {
                QlruReplace::R0 => 0,
                QlruReplace::R1 => 1,
                QlruReplace::R2 => 2,
            };
            let u = match cfg.update {
                QlruUpdate::U0 => 0,
                QlruUpdate::U1 => 1,
                QlruUpdate::U2 => 2,
                QlruUpdate::U3 => 3,
            };
            let umo = if cfg.umo { "_UMO" } else { "" };
            format!("QLRU_H{}{}_{insertion}_R{r}_U{u}{umo}", cfg.hit_x, cfg.hit_y)
        }
        PolicySpec::Permutation(vectors) => {
            let parts: Vec<String> = vectors
                .hit
                .iter()
                .chain(std::iter::once(&vectors.miss))
                .map(|v| {
                    v.iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            format!("PERM{{{}}}", parts.join("|"))
        }
        PolicySpec::Adaptive(cfg) => {
            format!(
                "ADAPTIVE{{a={};b={};leaders_a={};leaders_b={};psel_bits={}}}",
                format_policy_name(&cfg.policy_a),
                format_policy_name(&cfg.policy_b),
                format_set_list(&cfg.leader_sets_a),
                format_set_list(&cfg.leader_sets_b),
                cfg.psel_bits
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_srrip_style_name() {
        let spec = parse_policy_name("QLRU_H00_M2_R0_U0_UMO").unwrap();
        let PolicySpec::Qlru(cfg) = spec else {
            panic!("expected QLRU")
        };
        assert_eq!((cfg.hit_x, cfg.hit_y), (0, 0));
        assert_eq!(cfg.insertion, InsertionAge::Fixed(2));
        assert_eq!(cfg.replace, QlruReplace::R0);
        assert_eq!(cfg.update, QlruUpdate::U0);
        assert!(cfg.umo);
    }

    #[test]
    fn parses_bare_names() {
        assert_eq!(parse_policy_name("PLRU").unwrap(), PolicySpec::Plru);
        assert_eq!(parse_policy_name("MRU*").unwrap(), PolicySpec::MruStar);
    }

    #[test]
    fn rejects_invalid_combination() {
        let err = parse_policy_name("QLRU_H00_M1_R0_U2").unwrap_err();
        assert!(matches!(err, PolicyNameError::Invalid(_)), "{err}");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_policy_name("QLRU_H00").is_err());
        assert!(parse_policy_name("QLRU_H00_M1_R3_U0").is_err());
        assert!(parse_policy_name("QLRU_H30_M1_R1_U0").is_err());
        assert!(parse_policy_name("lru").is_err());
        assert!(parse_policy_name("").is_err());
    }

    #[test]
    fn probabilistic_rendering_round_trips() {
        let name = "QLRU_H11_MR16-1_R1_U2";
        let spec = parse_policy_name(name).unwrap();
        assert_eq!(format_policy_name(&spec), name);
        let PolicySpec::Qlru(cfg) = spec else { panic!() };
        assert_eq!(cfg.insertion, InsertionAge::Probabilistic { p: 16, x: 1 });
    }

    #[test]
    fn adaptive_round_trips() {
        let name = "ADAPTIVE{a=QLRU_H11_M1_R1_U2;b=QLRU_H11_MR16-1_R1_U2;leaders_a=512-575;leaders_b=768-831;psel_bits=10}";
        let spec = parse_policy_name(name).unwrap();
        assert_eq!(format_policy_name(&spec), name);
        let PolicySpec::Adaptive(cfg) = &spec else { panic!() };
        assert_eq!(cfg.leader_sets_a.len(), 64);
        assert_eq!(cfg.leader_sets_a[0], 512);
        // Empty leader list stays empty through the round trip.
        let name2 = "ADAPTIVE{a=LRU;b=FIFO;leaders_a=0,33,132;leaders_b=;psel_bits=10}";
        let spec2 = parse_policy_name(name2).unwrap();
        assert_eq!(format_policy_name(&spec2), name2);
    }

    #[test]
    fn perm_round_trips() {
        let vectors = PermutationVectors::lru(4);
        let name = format_policy_name(&PolicySpec::Permutation(vectors.clone()));
        assert_eq!(name, "PERM{0,1,2,3|1,0,2,3|2,0,1,3|3,0,1,2|3,0,1,2}");
        assert_eq!(parse_policy_name(&name).unwrap(), PolicySpec::Permutation(vectors));
    }

    #[test]
    fn set_list_formatting() {
        assert_eq!(format_set_list(&[512, 513, 514, 515]), "512-515");
        assert_eq!(format_set_list(&[0, 33, 132]), "0,33,132");
        assert_eq!(format_set_list(&[5, 6]), "5,6");
        assert_eq!(format_set_list(&[]), "");
        assert_eq!(parse_set_list("512-515").unwrap(), vec![512, 513, 514, 515]);
        assert_eq!(parse_set_list("").unwrap(), Vec::<usize>::new());
    }
}
