//! Flat `key = value` experiment configs and run manifests.
//!
//! A sweep config names a rule, the fixed experiment parameters, and one
//! axis (`epsilon` or `voters`) whose values are listed either
//! comma-separated or as an inclusive range `start..stop step s`. The
//! manifest written next to every sweep CSV is itself a valid config that
//! reproduces the run byte for byte: all reals are serialized with enough
//! digits to re-parse to identical bits, and the seed is recorded.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::format_real;
use crate::privacy::DeltaSpec;
use crate::ranking::PositionalRule;
use crate::simulator::{SweepConfig, SweepValues};

/// Parses `--rule` syntax: `borda`, `plurality`, or `custom:<s1,...,sm>`
/// with non-increasing scores. `m` is the expected candidate count.
pub fn parse_rule(spec: &str, m: usize) -> Result<PositionalRule> {
    match spec {
        "borda" => PositionalRule::borda(m),
        "plurality" => PositionalRule::plurality(m),
        _ => {
            let Some(rest) = spec.strip_prefix("custom:") else {
                return Err(Error::Config(format!(
                    "unknown rule `{spec}`; expected borda, plurality, or custom:<s1,...,sm>"
                )));
            };
            let scores = rest
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| {
                        Error::Config(format!("bad score `{t}` in rule `{spec}`"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let rule = PositionalRule::custom(&scores)?;
            if rule.m() != m {
                return Err(Error::DimensionMismatch { expected: m, got: rule.m() });
            }
            Ok(rule)
        }
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((k, v)) = trimmed.split_once('=') else {
            return Err(Error::Parse {
                line,
                msg: format!("expected `key = value`, got `{trimmed}`"),
            });
        };
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse { line, msg: "empty key or value".into() });
        }
        if let Some(previous) = entries.iter().find(|e| e.key == key) {
            return Err(Error::Config(format!(
                "duplicate key `{key}` on lines {} and {line}",
                previous.line
            )));
        }
        entries.push(Entry { key, value, line });
    }
    Ok(entries)
}

fn is_list_syntax(value: &str) -> bool {
    value.contains(',') || value.contains("..")
}

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number `{value}` for key `{key}`"),
    })
}

fn parse_u64(key: &str, value: &str, line: usize) -> Result<u64> {
    value.parse::<u64>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad integer `{value}` for key `{key}`"),
    })
}

fn parse_usize(key: &str, value: &str, line: usize) -> Result<usize> {
    value.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad integer `{value}` for key `{key}`"),
    })
}

/// `start..stop step s` (inclusive of `stop` up to a relative slack of
/// 1e-9 steps, so decimal steps hit their intended endpoint), or a comma
/// list, or a single number.
fn parse_f64_list(key: &str, value: &str, line: usize) -> Result<Vec<f64>> {
    if let Some((start, rest)) = value.split_once("..") {
        let Some((stop, step)) = rest.split_once("step") else {
            return Err(Error::Parse {
                line,
                msg: format!("range for `{key}` needs the form `start..stop step s`"),
            });
        };
        let a = parse_f64(key, start.trim(), line)?;
        let b = parse_f64(key, stop.trim(), line)?;
        let s = parse_f64(key, step.trim(), line)?;
        if !(s > 0.0) || b < a {
            return Err(Error::Config(format!(
                "range for `{key}` needs stop >= start and step > 0"
            )));
        }
        let mut values = Vec::new();
        let mut k = 0u64;
        loop {
            let x = a + k as f64 * s;
            if x > b + s * 1e-9 {
                break;
            }
            values.push(x);
            k += 1;
        }
        Ok(values)
    } else {
        value
            .split(',')
            .map(|t| parse_f64(key, t.trim(), line))
            .collect()
    }
}

fn parse_u64_list(key: &str, value: &str, line: usize) -> Result<Vec<u64>> {
    if let Some((start, rest)) = value.split_once("..") {
        let Some((stop, step)) = rest.split_once("step") else {
            return Err(Error::Parse {
                line,
                msg: format!("range for `{key}` needs the form `start..stop step s`"),
            });
        };
        let a = parse_u64(key, start.trim(), line)?;
        let b = parse_u64(key, stop.trim(), line)?;
        let s = parse_u64(key, step.trim(), line)?;
        if s == 0 || b < a {
            return Err(Error::Config(format!(
                "range for `{key}` needs stop >= start and step > 0"
            )));
        }
        Ok((a..=b).step_by(s as usize).collect())
    } else {
        value
            .split(',')
            .map(|t| parse_u64(key, t.trim(), line))
            .collect()
    }
}

const KNOWN_KEYS: [&str; 11] = [
    "command",
    "version",
    "rule",
    "candidates",
    "axis",
    "epsilon",
    "voters",
    "delta",
    "delta_scale",
    "trials",
    "seed",
];

/// Parses a sweep config from text. See the module docs for the format.
pub fn parse_sweep_config_text(text: &str) -> Result<SweepConfig> {
    let entries = parse_entries(text)?;

    let unknown: Vec<&str> = entries
        .iter()
        .filter(|e| !KNOWN_KEYS.contains(&e.key.as_str()))
        .map(|e| e.key.as_str())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
    }

    let get = |key: &str| entries.iter().find(|e| e.key == key);
    let require = |key: &str| {
        get(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    };

    if let Some(e) = get("command") {
        if e.value != "sweep" {
            return Err(Error::Config(format!(
                "this config drives `{}`, not sweep",
                e.value
            )));
        }
    }

    let cand = require("candidates")?;
    let m = parse_usize(&cand.key, &cand.value, cand.line)?;
    let rule = match get("rule") {
        Some(e) => parse_rule(&e.value, m)?,
        None => PositionalRule::borda(m)?,
    };

    let trials_entry = require("trials")?;
    let trials = parse_u64(&trials_entry.key, &trials_entry.value, trials_entry.line)?;
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let seed = match get("seed") {
        Some(e) => parse_u64(&e.key, &e.value, e.line)?,
        None => 0,
    };

    let delta = match (get("delta"), get("delta_scale")) {
        (Some(d), None) => DeltaSpec::Absolute(parse_f64(&d.key, &d.value, d.line)?),
        (None, Some(s)) => DeltaSpec::PerVoter(parse_f64(&s.key, &s.value, s.line)?),
        (Some(_), Some(_)) => {
            return Err(Error::Config("give delta or delta_scale, not both".into()))
        }
        (None, None) => {
            return Err(Error::Config("missing delta (or delta_scale)".into()))
        }
    };

    let eps_entry = require("epsilon")?;
    let voters_entry = require("voters")?;
    let axis = match get("axis") {
        Some(e) => match e.value.as_str() {
            "epsilon" | "voters" => e.value.clone(),
            other => {
                return Err(Error::Config(format!(
                    "axis must be epsilon or voters, got `{other}`"
                )))
            }
        },
        None => {
            let eps_lists = is_list_syntax(&eps_entry.value);
            let voters_lists = is_list_syntax(&voters_entry.value);
            match (eps_lists, voters_lists) {
                (true, false) => "epsilon".to_string(),
                (false, true) => "voters".to_string(),
                (true, true) => {
                    return Err(Error::Config(
                        "both epsilon and voters list several values; only one axis can vary"
                            .into(),
                    ))
                }
                (false, false) => {
                    return Err(Error::Config(
                        "neither epsilon nor voters is a list; give one axis several \
                         values or name it with `axis = ...`"
                            .into(),
                    ))
                }
            }
        }
    };

    let values = if axis == "epsilon" {
        if is_list_syntax(&voters_entry.value) {
            return Err(Error::Config(
                "voters must be a single value when epsilon is the axis".into(),
            ));
        }
        SweepValues::Epsilon {
            values: parse_f64_list(&eps_entry.key, &eps_entry.value, eps_entry.line)?,
            voters: parse_u64(&voters_entry.key, &voters_entry.value, voters_entry.line)?,
        }
    } else {
        if is_list_syntax(&eps_entry.value) {
            return Err(Error::Config(
                "epsilon must be a single value when voters is the axis".into(),
            ));
        }
        SweepValues::Voters {
            values: parse_u64_list(&voters_entry.key, &voters_entry.value, voters_entry.line)?,
            epsilon: parse_f64(&eps_entry.key, &eps_entry.value, eps_entry.line)?,
        }
    };

    Ok(SweepConfig { rule, values, delta, trials, seed })
}

/// Parses a sweep config file.
pub fn parse_sweep_config(path: &Path) -> Result<SweepConfig> {
    parse_sweep_config_text(&std::fs::read_to_string(path)?)
}

/// Renders the resolved configuration as a config file that reproduces the
/// run exactly: `sweep --config <manifest>` writes a byte-identical CSV.
pub fn sweep_manifest(config: &SweepConfig) -> String {
    let mut out = String::new();
    out.push_str("# sweep manifest; rerun with: dpvote sweep --config <this file> --out <csv>\n");
    out.push_str("command = sweep\n");
    out.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("rule = {}\n", config.rule.label()));
    out.push_str(&format!("candidates = {}\n", config.rule.m()));
    match &config.values {
        SweepValues::Epsilon { values, voters } => {
            out.push_str("axis = epsilon\n");
            let list: Vec<String> = values.iter().map(|&e| format_real(e)).collect();
            out.push_str(&format!("epsilon = {}\n", list.join(",")));
            out.push_str(&format!("voters = {voters}\n"));
        }
        SweepValues::Voters { values, epsilon } => {
            out.push_str("axis = voters\n");
            let list: Vec<String> = values.iter().map(|&n| n.to_string()).collect();
            out.push_str(&format!("voters = {}\n", list.join(",")));
            out.push_str(&format!("epsilon = {}\n", format_real(*epsilon)));
        }
    }
    match config.delta {
        DeltaSpec::Absolute(d) => out.push_str(&format!("delta = {}\n", format_real(d))),
        DeltaSpec::PerVoter(c) => {
            out.push_str(&format!("delta_scale = {}\n", format_real(c)))
        }
    }
    out.push_str(&format!("trials = {}\n", config.trials));
    out.push_str(&format!("seed = {}\n", config.seed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
# comment
rule = borda
candidates = 3
epsilon = 0.05..0.24 step 0.01
voters = 2000
delta = 5e-4
trials = 100
seed = 42
";

    #[test]
    fn ranges_include_both_endpoints() {
        let cfg = parse_sweep_config_text(BASIC).unwrap();
        let SweepValues::Epsilon { values, voters } = &cfg.values else {
            panic!("expected an epsilon sweep")
        };
        assert_eq!(*voters, 2000);
        assert_eq!(values.len(), 20);
        assert!((values[0] - 0.05).abs() < 1e-15);
        assert!((values[19] - 0.24).abs() < 1e-12);
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn comma_lists_and_integer_ranges_parse() {
        let text = "\
candidates = 3
epsilon = 0.1
voters = 1000,3162,10000
delta_scale = 0.1
trials = 10
";
        let cfg = parse_sweep_config_text(text).unwrap();
        let SweepValues::Voters { values, epsilon } = &cfg.values else {
            panic!("expected a voters sweep")
        };
        assert_eq!(values, &[1000, 3162, 10000]);
        assert_eq!(*epsilon, 0.1);
        assert_eq!(cfg.delta, DeltaSpec::PerVoter(0.1));
        assert_eq!(cfg.seed, 0);

        let text = "\
candidates = 3
epsilon = 0.1
voters = 1000..3000 step 1000
delta = 1e-4
trials = 10
";
        let cfg = parse_sweep_config_text(text).unwrap();
        let SweepValues::Voters { values, .. } = &cfg.values else { panic!() };
        assert_eq!(values, &[1000, 2000, 3000]);
    }

    #[test]
    fn unknown_keys_are_listed() {
        let text = "candidates = 3\nepsilon = 0.1,0.2\nvoters = 10\ndelta = 1e-4\ntrials = 5\nbogus = 1\nworse = 2\n";
        let err = parse_sweep_config_text(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("worse"), "{msg}");
    }

    #[test]
    fn duplicate_and_malformed_lines_have_line_numbers() {
        let err = parse_sweep_config_text("candidates = 3\ncandidates = 4\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("lines 1 and 2"), "{err}");

        let err = parse_sweep_config_text("candidates 3\n").unwrap_err();
        let Error::Parse { line, .. } = err else { panic!("want parse error, got {err}") };
        assert_eq!(line, 1);

        let err =
            parse_sweep_config_text("candidates = 3\nepsilon = zap\nvoters = 10,20\ndelta = 1e-4\ntrials = 5\n")
                .unwrap_err();
        let Error::Parse { line, .. } = err else { panic!("want parse error, got {err}") };
        assert_eq!(line, 2);
    }

    #[test]
    fn axis_ambiguity_is_rejected() {
        let both = "candidates = 3\nepsilon = 0.1,0.2\nvoters = 10,20\ndelta = 1e-4\ntrials = 5\n";
        assert!(matches!(parse_sweep_config_text(both), Err(Error::Config(_))));
        let neither = "candidates = 3\nepsilon = 0.1\nvoters = 10\ndelta = 1e-4\ntrials = 5\n";
        assert!(matches!(parse_sweep_config_text(neither), Err(Error::Config(_))));
        // an explicit axis key resolves a single-value list
        let explicit =
            "candidates = 3\naxis = epsilon\nepsilon = 0.1\nvoters = 10\ndelta = 1e-4\ntrials = 5\n";
        let cfg = parse_sweep_config_text(explicit).unwrap();
        assert!(matches!(cfg.values, SweepValues::Epsilon { .. }));
    }

    #[test]
    fn manifests_round_trip_to_the_same_config() {
        for text in [
            BASIC,
            "candidates = 4\nrule = plurality\nepsilon = 0.1\nvoters = 100,200\ndelta_scale = 0.05\ntrials = 7\nseed = 9\n",
            "candidates = 3\nrule = custom:3,1.5,0\nepsilon = 0.3,0.7 \nvoters = 50\ndelta = 1e-5\ntrials = 3\n",
        ] {
            let cfg = parse_sweep_config_text(text).unwrap();
            let manifest = sweep_manifest(&cfg);
            let reparsed = parse_sweep_config_text(&manifest).unwrap();
            assert_eq!(reparsed.rule, cfg.rule);
            assert_eq!(reparsed.trials, cfg.trials);
            assert_eq!(reparsed.seed, cfg.seed);
            assert_eq!(reparsed.delta, cfg.delta);
            match (&reparsed.values, &cfg.values) {
                (
                    SweepValues::Epsilon { values: a, voters: na },
                    SweepValues::Epsilon { values: b, voters: nb },
                ) => {
                    assert_eq!(na, nb);
                    assert_eq!(a, b, "epsilon values must round-trip bit-exactly");
                }
                (
                    SweepValues::Voters { values: a, epsilon: ea },
                    SweepValues::Voters { values: b, epsilon: eb },
                ) => {
                    assert_eq!(ea, eb);
                    assert_eq!(a, b);
                }
                _ => panic!("axis changed across the round trip"),
            }
            // the manifest is stable: rendering the reparsed config again
            // yields the identical bytes
            assert_eq!(sweep_manifest(&reparsed), manifest);
        }
    }

    #[test]
    fn rule_parsing_covers_the_three_forms() {
        assert_eq!(parse_rule("borda", 3).unwrap(), PositionalRule::borda(3).unwrap());
        assert_eq!(parse_rule("plurality", 4).unwrap(), PositionalRule::plurality(4).unwrap());
        let custom = parse_rule("custom:3,1.5,0", 3).unwrap();
        assert_eq!(custom.scores(), &[1.0, 0.5, 0.0]);
        assert!(matches!(parse_rule("veto", 3), Err(Error::Config(_))));
        assert!(matches!(
            parse_rule("custom:1,0.5,0", 4),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
        assert!(parse_rule("custom:1,x,0", 3).is_err());
    }
}
