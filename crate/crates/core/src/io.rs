//! Text formats: profile CSV, wave records and flat key-value config files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::fmt_sig;
use crate::sim::EmpiricalProfile;

pub const PROFILE_HEADER: &str = "time,bin_center,density,replicas";
pub const SOLUTION_HEADER: &str = "x,u";

/// Significant digits used in every CSV we emit.
pub const DIGITS: usize = 12;

pub fn num(x: f64) -> String {
    fmt_sig(x, DIGITS)
}

/// A sampled density profile at a single time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub time: Option<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub replicas: Option<usize>,
}

impl ProfileTable {
    pub fn from_empirical(p: &EmpiricalProfile) -> Self {
        Self {
            time: Some(p.time),
            x: p.bin_centers.clone(),
            u: p.densities.clone(),
            replicas: Some(p.replica_count),
        }
    }
}

pub fn profiles_to_csv(profiles: &[ProfileTable]) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for p in profiles {
        let t = p.time.map(num).unwrap_or_default();
        let r = p.replicas.map(|r| r.to_string()).unwrap_or_default();
        for (x, u) in p.x.iter().zip(&p.u) {
            let _ = writeln!(out, "{t},{},{},{r}", num(*x), num(*u));
        }
    }
    out
}

pub fn solution_to_csv(x: &[f64], u: &[f64]) -> String {
    let mut out = String::from(SOLUTION_HEADER);
    out.push('\n');
    for (x, u) in x.iter().zip(u) {
        let _ = writeln!(out, "{},{}", num(*x), num(*u));
    }
    out
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("line {line}: bad number {s:?}")))
}

/// Reads either the profile schema (grouped by time, in file order) or the
/// two-column `x,u` schema.
pub fn parse_profile_csv(text: &str) -> Result<Vec<ProfileTable>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty profile file".into()))?;
    let header = header.trim();
    let mut tables: Vec<ProfileTable> = Vec::new();
    if header == SOLUTION_HEADER {
        let mut t = ProfileTable { time: None, x: Vec::new(), u: Vec::new(), replicas: None };
        for (i, l) in lines {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected 2 fields", i + 1)));
            }
            t.x.push(parse_f64(f[0], i + 1)?);
            t.u.push(parse_f64(f[1], i + 1)?);
        }
        tables.push(t);
    } else if header == PROFILE_HEADER {
        for (i, l) in lines {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 fields", i + 1)));
            }
            let time = if f[0].trim().is_empty() { None } else { Some(parse_f64(f[0], i + 1)?) };
            let replicas = if f[3].trim().is_empty() {
                None
            } else {
                Some(f[3].trim().parse().map_err(|_| Error::Parse(format!("line {}: bad replica count", i + 1)))?)
            };
            if tables.last().is_none_or(|t| t.time != time) {
                tables.push(ProfileTable { time, x: Vec::new(), u: Vec::new(), replicas });
            }
            let t = tables.last_mut().unwrap();
            t.x.push(parse_f64(f[1], i + 1)?);
            t.u.push(parse_f64(f[2], i + 1)?);
        }
    } else {
        return Err(Error::Parse(format!("unrecognised profile header {header:?}")));
    }
    if tables.iter().all(|t| t.x.is_empty()) {
        return Err(Error::Parse("profile file has no rows".into()));
    }
    Ok(tables)
}

pub fn read_profile_csv(path: &Path) -> Result<Vec<ProfileTable>> {
    parse_profile_csv(&std::fs::read_to_string(path)?)
}

/// One line of a wave record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveRecord {
    Shock { speed: f64, left: f64, right: f64 },
    Fan { speed_lo: f64, speed_hi: f64 },
}

pub fn parse_wave_record(text: &str) -> Result<Vec<WaveRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.split_whitespace().collect();
            match (f[0], f.len()) {
                ("SHOCK", 4) => Ok(WaveRecord::Shock {
                    speed: parse_f64(f[1], i + 1)?,
                    left: parse_f64(f[2], i + 1)?,
                    right: parse_f64(f[3], i + 1)?,
                }),
                ("FAN", 3) => Ok(WaveRecord::Fan {
                    speed_lo: parse_f64(f[1], i + 1)?,
                    speed_hi: parse_f64(f[2], i + 1)?,
                }),
                _ => Err(Error::Parse(format!("line {}: bad wave record {l:?}", i + 1))),
            }
        })
        .collect()
}

/// Flat `key = value` text; `#` starts a comment. Keys are normalised to
/// use `-` so they match flag names.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse(format!("config line {}: empty key", i + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}
