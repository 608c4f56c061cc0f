//! CSV schemas for every interchange format, plus the fixed 9-significant-
//! digit float formatting that keeps golden files stable.
//!
//! Schemas (headers are exact):
//! - event log: `time,kind,subject,infector` (infector empty for the index)
//! - household events: `household_id,event,time`, event in
//!   {index, infection, recovery}; sizes sidecar: `household_id,size`
//! - count panel: `unit,week,year,count`
//! - weights: `from,to,weight`
//! - incidence: `t,count`
//! - removal times: `removal_time`
//! - estimates: `parameter,point,se,formula_id`
//! - detector: `s,y_s,mu_s,g_s,alarm` (unassessable weeks leave mu/g empty,
//!   alarm = `na`)
//! - intervals: `kind,value`
//! - posterior draws: `draw,<param names...>`
//! - patch trajectory: `t,S1,I1,R1,S2,I2,R2`

use std::io::{BufRead, BufReader, Read, Write};

use crate::epidemic::{Event, EventKind, EventLog};
use crate::error::{Error, Result};
use crate::households::{HouseholdEvent, HouseholdEventKind, HouseholdOutbreakData};
use crate::inference::PosteriorSample;
use crate::patches::PatchTrajectory;
use crate::surveillance::{CountPanel, DetectorRun, FarringtonStatus};

/// Formats with 9 significant digits (the `%.9g` convention: positional
/// for moderate exponents, scientific otherwise, trailing zeros trimmed).
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp10 = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp10) {
        let decimals = (8 - exp10).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{x:.8e}");
        // normalize "1.20000000e5" -> "1.2e5"
        match s.split_once('e') {
            Some((mant, exp)) => format!("{}e{}", trim_zeros(mant), exp),
            None => s,
        }
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, line: u64, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} from `{field}`"),
    })
}

fn split_line(line: &str) -> Vec<&str> {
    line.trim_end_matches(['\r', '\n']).split(',').collect()
}

fn expect_header(actual: &str, expected: &str) -> Result<()> {
    if actual.trim_end_matches(['\r', '\n']) != expected {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{expected}`, found `{actual}`"),
        });
    }
    Ok(())
}

fn read_lines<R: Read>(reader: R) -> Result<Vec<String>> {
    let buf = BufReader::new(reader);
    let mut out = Vec::new();
    for line in buf.lines() {
        out.push(line?);
    }
    Ok(out)
}

// ---------------------------------------------------------------- event log

pub fn write_event_log<W: Write>(log: &EventLog, mut w: W) -> Result<()> {
    writeln!(w, "time,kind,subject,infector")?;
    for ev in &log.events {
        let infector = ev.infector.map(|s| s.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            fmt_g9(ev.time),
            ev.kind.as_str(),
            ev.subject,
            infector
        )?;
    }
    Ok(())
}

/// Reads an event log; the population size is not part of the schema and
/// must be supplied.
pub fn read_event_log<R: Read>(reader: R, n: u32) -> Result<EventLog> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty event log file".into(),
        });
    }
    expect_header(&lines[0], "time,kind,subject,infector")?;
    let mut events = Vec::with_capacity(lines.len().saturating_sub(1));
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 4 fields, found {}", f.len()),
            });
        }
        let time: f64 = parse_field(f[0], lineno, "time")?;
        if !(time >= 0.0) {
            return Err(Error::Parse {
                line: lineno,
                msg: "negative event time".into(),
            });
        }
        let kind = EventKind::parse(f[1]).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let subject: u32 = parse_field(f[2], lineno, "subject")?;
        let infector = if f[3].trim().is_empty() {
            None
        } else {
            Some(parse_field(f[3], lineno, "infector")?)
        };
        events.push(Event {
            time,
            kind,
            subject,
            infector,
        });
    }
    let end_time = events.last().map(|e| e.time).unwrap_or(0.0);
    let log = EventLog {
        events,
        n,
        end_time,
    };
    log.verify().map_err(|e| Error::Parse {
        line: 1,
        msg: format!("inconsistent event log: {e}"),
    })?;
    Ok(log)
}

// ---------------------------------------------------------------- households

pub fn write_household_events<W: Write>(data: &HouseholdOutbreakData, mut w: W) -> Result<()> {
    writeln!(w, "household_id,event,time")?;
    for ev in &data.events {
        writeln!(
            w,
            "{},{},{}",
            ev.household,
            ev.kind.as_str(),
            fmt_g9(ev.time)
        )?;
    }
    Ok(())
}

/// Reads household events against a sizes table; `t_obs` defaults to the
/// last event time when not given.
pub fn read_household_events<R: Read>(
    reader: R,
    sizes: Vec<u32>,
    t_obs: Option<f64>,
) -> Result<HouseholdOutbreakData> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty household file".into(),
        });
    }
    expect_header(&lines[0], "household_id,event,time")?;
    let mut events = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 3 fields, found {}", f.len()),
            });
        }
        let household: u32 = parse_field(f[0], lineno, "household id")?;
        let kind = HouseholdEventKind::parse(f[1]).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let time: f64 = parse_field(f[2], lineno, "time")?;
        events.push(HouseholdEvent {
            time,
            kind,
            household,
        });
    }
    let t_last = events.iter().map(|e| e.time).fold(0.0f64, f64::max);
    let data = HouseholdOutbreakData {
        events,
        sizes,
        t_obs: t_obs.unwrap_or(t_last),
    };
    data.validate()?;
    Ok(data)
}

pub fn write_household_sizes<W: Write>(sizes: &[u32], mut w: W) -> Result<()> {
    writeln!(w, "household_id,size")?;
    for (i, s) in sizes.iter().enumerate() {
        writeln!(w, "{i},{s}")?;
    }
    Ok(())
}

pub fn read_household_sizes<R: Read>(reader: R) -> Result<Vec<u32>> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty sizes file".into(),
        });
    }
    expect_header(&lines[0], "household_id,size")?;
    let mut sizes = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 2 fields, found {}", f.len()),
            });
        }
        let id: usize = parse_field(f[0], lineno, "household id")?;
        if id != sizes.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("household ids must be 0,1,2,... (found {id})"),
            });
        }
        sizes.push(parse_field(f[1], lineno, "size")?);
    }
    Ok(sizes)
}

// ---------------------------------------------------------------- panels

pub fn write_panel<W: Write>(panel: &CountPanel, mut w: W) -> Result<()> {
    writeln!(w, "unit,week,year,count")?;
    for (i, unit) in panel.units.iter().enumerate() {
        for t in 0..panel.horizon() {
            writeln!(
                w,
                "{unit},{},{},{}",
                panel.week[t], panel.year[t], panel.y[i][t]
            )?;
        }
    }
    Ok(())
}

/// Reads a `unit,week,year,count` panel. Units keep first-appearance order;
/// every unit must cover the same (year, week) sequence.
pub fn read_panel<R: Read>(reader: R) -> Result<CountPanel> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty panel file".into(),
        });
    }
    expect_header(&lines[0], "unit,week,year,count")?;
    let mut units: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<(i32, u32, u64)>> = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 4 fields, found {}", f.len()),
            });
        }
        let unit = f[0].trim().to_string();
        let week: u32 = parse_field(f[1], lineno, "week")?;
        let year: i32 = parse_field(f[2], lineno, "year")?;
        let count: i64 = parse_field(f[3], lineno, "count")?;
        if count < 0 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("negative count {count}"),
            });
        }
        let uidx = match units.iter().position(|u| u == &unit) {
            Some(i) => i,
            None => {
                units.push(unit);
                rows.push(Vec::new());
                units.len() - 1
            }
        };
        rows[uidx].push((year, week, count as u64));
    }
    if units.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "panel has no rows".into(),
        });
    }
    let reference: Vec<(i32, u32)> = rows[0].iter().map(|&(y, w, _)| (y, w)).collect();
    for (i, row) in rows.iter().enumerate() {
        let periods: Vec<(i32, u32)> = row.iter().map(|&(y, w, _)| (y, w)).collect();
        if periods != reference {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unit `{}` does not cover the same periods", units[i]),
            });
        }
    }
    let week: Vec<u32> = reference.iter().map(|&(_, w)| w).collect();
    let year: Vec<i32> = reference.iter().map(|&(y, _)| y).collect();
    let y: Vec<Vec<u64>> = rows
        .iter()
        .map(|row| row.iter().map(|&(_, _, c)| c).collect())
        .collect();
    CountPanel::new(units, y, week, year)
}

pub fn write_weights<W: Write>(units: &[String], w_mat: &[Vec<f64>], mut w: W) -> Result<()> {
    writeln!(w, "from,to,weight")?;
    for (j, row) in w_mat.iter().enumerate() {
        for (i, &value) in row.iter().enumerate() {
            if value != 0.0 {
                writeln!(w, "{},{},{}", units[j], units[i], fmt_g9(value))?;
            }
        }
    }
    Ok(())
}

/// Reads `from,to,weight` into a matrix over the panel's unit order.
/// Unlisted pairs get weight zero.
pub fn read_weights<R: Read>(reader: R, units: &[String]) -> Result<Vec<Vec<f64>>> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty weights file".into(),
        });
    }
    expect_header(&lines[0], "from,to,weight")?;
    let m = units.len();
    let mut w_mat = vec![vec![0.0f64; m]; m];
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 3 fields, found {}", f.len()),
            });
        }
        let find = |name: &str| -> Result<usize> {
            units
                .iter()
                .position(|u| u == name.trim())
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: format!("unknown unit `{name}`"),
                })
        };
        let from = find(f[0])?;
        let to = find(f[1])?;
        let weight: f64 = parse_field(f[2], lineno, "weight")?;
        if !(weight >= 0.0) {
            return Err(Error::Parse {
                line: lineno,
                msg: "weights must be >= 0".into(),
            });
        }
        w_mat[from][to] = weight;
    }
    Ok(w_mat)
}

// ---------------------------------------------------------------- simple tables

pub fn write_incidence<W: Write>(counts: &[u64], mut w: W) -> Result<()> {
    writeln!(w, "t,count")?;
    for (t, c) in counts.iter().enumerate() {
        writeln!(w, "{t},{c}")?;
    }
    Ok(())
}

pub fn read_incidence<R: Read>(reader: R) -> Result<Vec<u64>> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty incidence file".into(),
        });
    }
    expect_header(&lines[0], "t,count")?;
    let mut counts = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 2 fields, found {}", f.len()),
            });
        }
        let t: usize = parse_field(f[0], lineno, "period index")?;
        if t != counts.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("period indices must be 0,1,2,... (found {t})"),
            });
        }
        let c: i64 = parse_field(f[1], lineno, "count")?;
        if c < 0 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("negative count {c}"),
            });
        }
        counts.push(c as u64);
    }
    Ok(counts)
}

pub fn write_removals<W: Write>(times: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "removal_time")?;
    for t in times {
        writeln!(w, "{}", fmt_g9(*t))?;
    }
    Ok(())
}

pub fn read_removals<R: Read>(reader: R) -> Result<Vec<f64>> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty removals file".into(),
        });
    }
    expect_header(&lines[0], "removal_time")?;
    let mut times = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        times.push(parse_field(line, (idx + 1) as u64, "removal time")?);
    }
    Ok(times)
}

pub fn write_estimates<W: Write>(rows: &[(String, f64, f64, String)], mut w: W) -> Result<()> {
    writeln!(w, "parameter,point,se,formula_id")?;
    for (name, point, se, id) in rows {
        writeln!(w, "{name},{},{},{id}", fmt_g9(*point), fmt_g9(*se))?;
    }
    Ok(())
}

pub fn read_estimates<R: Read>(reader: R) -> Result<Vec<(String, f64, f64, String)>> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty estimates file".into(),
        });
    }
    expect_header(&lines[0], "parameter,point,se,formula_id")?;
    let mut rows = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 4 fields, found {}", f.len()),
            });
        }
        rows.push((
            f[0].to_string(),
            parse_field(f[1], lineno, "point")?,
            parse_field(f[2], lineno, "se")?,
            f[3].to_string(),
        ));
    }
    Ok(rows)
}

pub fn write_intervals<W: Write>(kinds_values: &[(&str, &[f64])], mut w: W) -> Result<()> {
    writeln!(w, "kind,value")?;
    for (kind, values) in kinds_values {
        for v in *values {
            writeln!(w, "{kind},{}", fmt_g9(*v))?;
        }
    }
    Ok(())
}

/// Reads a `kind,value` interval file into per-kind vectors (kinds keep
/// first-appearance order).
pub fn read_intervals<R: Read>(reader: R) -> Result<Vec<(String, Vec<f64>)>> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty intervals file".into(),
        });
    }
    expect_header(&lines[0], "kind,value")?;
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 2 fields, found {}", f.len()),
            });
        }
        let value: f64 = parse_field(f[1], lineno, "interval")?;
        match out.iter_mut().find(|(k, _)| k == f[0]) {
            Some((_, v)) => v.push(value),
            None => out.push((f[0].to_string(), vec![value])),
        }
    }
    Ok(out)
}

pub fn write_detector_run<W: Write>(series: &[u64], run: &DetectorRun, mut w: W) -> Result<()> {
    writeln!(w, "s,y_s,mu_s,g_s,alarm")?;
    for a in &run.assessments {
        match &a.status {
            FarringtonStatus::Assessed {
                mu,
                threshold,
                alarm,
            } => writeln!(
                w,
                "{},{},{},{},{}",
                a.index,
                series[a.index],
                fmt_g9(*mu),
                fmt_g9(*threshold),
                alarm
            )?,
            FarringtonStatus::NotAssessable { .. } => {
                writeln!(w, "{},{},,,na", a.index, series[a.index])?
            }
        }
    }
    Ok(())
}

pub fn write_posterior<W: Write>(sample: &PosteriorSample, mut w: W) -> Result<()> {
    writeln!(w, "draw,{}", sample.param_names.join(","))?;
    for (i, draw) in sample.draws.iter().enumerate() {
        let cells: Vec<String> = draw.iter().map(|v| fmt_g9(*v)).collect();
        writeln!(w, "{i},{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads posterior draws back as `(param_names, draws)`.
pub fn read_posterior<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty posterior file".into(),
        });
    }
    let header = split_line(&lines[0]);
    if header.first() != Some(&"draw") || header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header `draw,<param names...>`".into(),
        });
    }
    let names: Vec<String> = header[1..].iter().map(|s| s.to_string()).collect();
    let mut draws = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != header.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {} fields, found {}", header.len(), f.len()),
            });
        }
        let row: Vec<f64> = f[1..]
            .iter()
            .map(|v| parse_field(v, lineno, "draw"))
            .collect::<Result<_>>()?;
        draws.push(row);
    }
    Ok((names, draws))
}

pub fn write_patch_trajectory<W: Write>(traj: &PatchTrajectory, mut w: W) -> Result<()> {
    writeln!(w, "t,S1,I1,R1,S2,I2,R2")?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let cells: Vec<String> = s.iter().map(|v| fmt_g9(*v)).collect();
        writeln!(w, "{},{}", fmt_g9(*t), cells.join(","))?;
    }
    Ok(())
}

pub fn read_patch_trajectory<R: Read>(reader: R) -> Result<PatchTrajectory> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty trajectory file".into(),
        });
    }
    expect_header(&lines[0], "t,S1,I1,R1,S2,I2,R2")?;
    let mut traj = PatchTrajectory {
        times: Vec::new(),
        states: Vec::new(),
    };
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 7 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 7 fields, found {}", f.len()),
            });
        }
        traj.times.push(parse_field(f[0], lineno, "time")?);
        let mut state = [0.0f64; 6];
        for (k, slot) in state.iter_mut().enumerate() {
            *slot = parse_field(f[k + 1], lineno, "state")?;
        }
        traj.states.push(state);
    }
    Ok(traj)
}

/// Reads a detector table back as `(series values by index, run)`.
/// The free-text reason of unassessable weeks is not part of the schema.
pub fn read_detector_run<R: Read>(reader: R) -> Result<(Vec<u64>, DetectorRun)> {
    let lines = read_lines(reader)?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty detector file".into(),
        });
    }
    expect_header(&lines[0], "s,y_s,mu_s,g_s,alarm")?;
    let mut series = Vec::new();
    let mut assessments = Vec::new();
    let mut alarm_time = None;
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (idx + 1) as u64;
        let f = split_line(line);
        if f.len() != 5 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 5 fields, found {}", f.len()),
            });
        }
        let s: usize = parse_field(f[0], lineno, "index")?;
        if s != series.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("detector rows must cover s = 0,1,2,... (found {s})"),
            });
        }
        let observed: u64 = parse_field(f[1], lineno, "count")?;
        series.push(observed);
        let status = match f[4] {
            "na" => crate::surveillance::FarringtonStatus::NotAssessable {
                reason: "not assessable".into(),
            },
            "true" | "false" => {
                let alarm = f[4] == "true";
                if alarm && alarm_time.is_none() {
                    alarm_time = Some(s);
                }
                crate::surveillance::FarringtonStatus::Assessed {
                    mu: parse_field(f[2], lineno, "mu")?,
                    threshold: parse_field(f[3], lineno, "threshold")?,
                    alarm,
                }
            }
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("bad alarm field `{other}`"),
                })
            }
        };
        assessments.push(crate::surveillance::FarringtonAssessment {
            index: s,
            observed,
            status,
        });
    }
    Ok((
        series,
        DetectorRun {
            assessments,
            alarm_time,
        },
    ))
}
