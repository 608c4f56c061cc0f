//! Flag parsing, atomic output and the result envelope.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use epikit::{Error, GenerationTimeDist, PriorDist, Result};

use crate::args::OutputArgs;

pub fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad {what} entry `{tok}`")))
        })
        .collect()
}

pub fn parse_matrix(s: &str, what: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').map(|row| parse_f64_list(row, what)).collect()
}

pub fn parse_u32_list(s: &str, what: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("bad {what} entry `{tok}`")))
        })
        .collect()
}

/// "a:b" half-open index window.
pub fn parse_window(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("window `{s}` is not of the form a:b")))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad window start `{a}`")))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad window end `{b}`")))?;
    Ok((a, b))
}

/// "lo:hi" time window.
pub fn parse_time_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("window `{s}` is not of the form lo:hi")))?;
    let lo = a
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad window start `{a}`")))?;
    let hi = b
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad window end `{b}`")))?;
    Ok((lo, hi))
}

/// "gamma:a,b" or "uniform:lo,hi".
pub fn parse_prior(s: &str) -> Result<PriorDist> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("prior `{s}` is not of the form kind:params")))?;
    let params = parse_f64_list(rest, "prior parameter")?;
    match (kind, params.as_slice()) {
        ("gamma", [shape, rate]) => Ok(PriorDist::Gamma {
            shape: *shape,
            rate: *rate,
        }),
        ("uniform", [lo, hi]) => Ok(PriorDist::Uniform { lo: *lo, hi: *hi }),
        _ => Err(Error::invalid(format!(
            "prior `{s}` must be gamma:shape,rate or uniform:lo,hi"
        ))),
    }
}

/// "exp:rate", "fixed:value", "gamma:shape,rate" or "empirical:path"
/// (single-column CSV with header `value`).
pub fn parse_gen_dist(s: &str) -> Result<GenerationTimeDist> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("distribution `{s}` needs kind:params")))?;
    match kind {
        "exp" | "exponential" => Ok(GenerationTimeDist::Exponential {
            rate: rest
                .parse()
                .map_err(|_| Error::invalid(format!("bad rate `{rest}`")))?,
        }),
        "fixed" => Ok(GenerationTimeDist::Fixed {
            value: rest
                .parse()
                .map_err(|_| Error::invalid(format!("bad value `{rest}`")))?,
        }),
        "gamma" => {
            let p = parse_f64_list(rest, "gamma parameter")?;
            if p.len() != 2 {
                return Err(Error::invalid("gamma takes shape,rate"));
            }
            Ok(GenerationTimeDist::Gamma {
                shape: p[0],
                rate: p[1],
            })
        }
        "empirical" => {
            let text = fs::read_to_string(rest)?;
            let mut lines = text.lines();
            match lines.next() {
                Some("value") => {}
                other => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("expected header `value`, found `{other:?}`"),
                    })
                }
            }
            let mut samples = Vec::new();
            for (i, line) in lines.enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                samples.push(line.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: (i + 2) as u64,
                    msg: format!("bad sample `{line}`"),
                })?);
            }
            Ok(GenerationTimeDist::Empirical { samples })
        }
        other => Err(Error::invalid(format!(
            "unknown distribution kind `{other}`"
        ))),
    }
}

/// Writes via a temp file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Renders the payload, writes it (stdout or file) and drops the envelope
/// JSON next to it. The envelope echoes the full configuration and seed, so
/// any stochastic result can be reproduced from it alone.
pub struct Emitter {
    started: Instant,
    command: String,
    config: serde_json::Value,
    seed: Option<u64>,
}

impl Emitter {
    pub fn new<C: serde::Serialize>(command: &str, config: &C, seed: Option<u64>) -> Self {
        Emitter {
            started: Instant::now(),
            command: command.to_string(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            seed,
        }
    }

    pub fn emit(&self, output: &OutputArgs, payload: &[u8]) -> Result<()> {
        self.emit_with_extra(output, payload, serde_json::Value::Null)
    }

    /// Like [`Emitter::emit`], with an extra `result` block in the envelope
    /// (summary numbers such as acceptance rates or alarm times).
    pub fn emit_with_extra(
        &self,
        output: &OutputArgs,
        payload: &[u8],
        extra: serde_json::Value,
    ) -> Result<()> {
        match &output.out {
            Some(path) => write_atomic(Path::new(path), payload)?,
            None => {
                std::io::stdout().write_all(payload)?;
            }
        }
        let meta_path: Option<PathBuf> = match (&output.meta, &output.out) {
            (Some(m), _) => Some(PathBuf::from(m)),
            (None, Some(o)) => Some(PathBuf::from(format!("{o}.meta.json"))),
            (None, None) => None,
        };
        if let Some(meta) = meta_path {
            let envelope = serde_json::json!({
                "toolkit": "epikit",
                "version": env!("CARGO_PKG_VERSION"),
                "command": self.command,
                "config": self.config,
                "seed": self.seed,
                "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
                "payload": output.out,
                "result": extra,
            });
            let text = serde_json::to_string_pretty(&envelope)
                .map_err(|e| Error::invalid(format!("envelope serialization: {e}")))?;
            write_atomic(&meta, text.as_bytes())?;
        }
        Ok(())
    }
}
