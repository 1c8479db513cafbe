use anyhow::{bail, Result};

/// `steps` points from `min` to `max` inclusive, evenly spaced in value or
/// in log.
pub fn spaced(min: f64, max: f64, steps: usize, log: bool) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || max < min {
        bail!("grid bounds must be finite with min <= max, got [{min}, {max}]");
    }
    if steps == 0 {
        bail!("grid needs at least one step");
    }
    if log && min <= 0.0 {
        bail!("logarithmic grid needs min > 0, got {min}");
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            if i == steps - 1 {
                max
            } else if log {
                (min.ln() + t * (max.ln() - min.ln())).exp()
            } else {
                min + t * (max - min)
            }
        })
        .collect())
}

/// A parsed cutoff list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cutoffs(pub Vec<u32>);

/// A parsed list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Reals(pub Vec<f64>);

pub fn cutoffs_arg(s: &str) -> Result<Cutoffs, String> {
    parse_cutoffs(s).map(Cutoffs)
}

pub fn reals_arg(s: &str) -> Result<Reals, String> {
    parse_reals(s).map(Reals)
}

/// Cutoff lists: `3`, `1,2,5` or the inclusive range `1..4`.
pub fn parse_cutoffs(s: &str) -> Result<Vec<u32>, String> {
    let s = s.trim();
    let list: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a
            .trim()
            .parse()
            .map_err(|e| format!("bad range start: {e}"))?;
        let b: u32 = b
            .trim()
            .parse()
            .map_err(|e| format!("bad range end: {e}"))?;
        if b < a {
            return Err(format!("empty range {a}..{b}"));
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|e| format!("bad cutoff {p:?}: {e}"))
            })
            .collect::<Result<_, _>>()?
    };
    if list.is_empty() {
        return Err("no cutoffs given".into());
    }
    Ok(list)
}

/// Real-valued lists: `0.1,0.01` or `start:stop:steps`.
pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let a: f64 = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("bad stop: {e}"))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|e| format!("bad step count: {e}"))?;
            spaced(a, b, n, false).map_err(|e| e.to_string())
        }
        [_] => s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad value {p:?}: {e}"))
            })
            .collect(),
        _ => Err(format!(
            "expected a comma list or start:stop:steps, got {s:?}"
        )),
    }
}
