use std::str::FromStr;

/// Inclusive `start:stop:step` range, or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        if self.start == self.stop {
            return vec![self.start];
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let v = self.start + k as f64 * self.step;
                (v * 1e12).round() / 1e12
            })
            .collect()
    }
}

impl FromStr for SweepRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        };
        let range = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                SweepRange { start: v, stop: v, step: 1.0 }
            }
            [a, b, c] => SweepRange {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            _ => return Err(format!("`{s}` is neither a number nor start:stop:step")),
        };
        if range.step <= 0.0 {
            return Err(format!("step in `{s}` must be positive"));
        }
        if range.start > range.stop {
            return Err(format!("start exceeds stop in `{s}`"));
        }
        Ok(range)
    }
}

/// Sample counts accept scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= 1e15) {
        return Err(format!("`{s}` is not a positive integer count"));
    }
    Ok(v as usize)
}
