//! Input functions: CSV rows `θ, Re h, Im h` on a uniform periodic grid.

use fbheat::grid::{dft, idft, PeriodicGridFunction};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Parse the CSV and interpolate onto the library's `m`-point grid θ_j = −π + 2πj/m.
/// A header row is allowed; the first θ may sit anywhere on the circle.
pub fn read_grid_function(text: &str, m: usize) -> Result<PeriodicGridFunction, String> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let mut theta = vec![];
    let mut samples = vec![];
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format!("input CSV: {e}"))?;
        let nums: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let nums = match nums {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(format!("input CSV row {}: expected numbers, got {:?}", i + 1, rec)),
        };
        if nums.len() != 3 {
            return Err(format!("input CSV row {}: expected 3 columns (theta, re, im), got {}", i + 1, nums.len()));
        }
        theta.push(nums[0]);
        samples.push(Complex64::new(nums[1], nums[2]));
    }
    let n = theta.len();
    if n < 2 {
        return Err(format!("input CSV has {n} rows, need a periodic grid"));
    }
    let step = 2.0 * PI / n as f64;
    let bad = theta.iter().enumerate().find(|(j, &t)| (t - theta[0] - *j as f64 * step).abs() > 1e-9 * (1.0 + t.abs()));
    if let Some((j, t)) = bad {
        return Err(format!("input CSV is not a uniform grid of {n} points over one period (row {}: theta {t})", j + 1));
    }
    let g = PeriodicGridFunction::new(samples).map_err(|e| e.to_string())?;
    // undo the offset of the first node from −π, then interpolate
    let mut c = dft(&g);
    let shift = theta[0] + PI;
    let b = c.band() as i64;
    for k in -b..=b {
        let v = c.get(k) * Complex64::from_polar(1.0, -(k as f64) * shift);
        c.set(k, v);
    }
    let band = c.band().min(m.saturating_sub(2) / 2);
    idft(&c.with_band(band), m).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_of(m: usize, offset: f64, f: impl Fn(f64) -> f64) -> String {
        let mut s = String::from("theta,re,im\n");
        for j in 0..m {
            let t = offset + 2.0 * PI * j as f64 / m as f64;
            s += &format!("{t:.17e},{:.17e},0\n", f(t));
        }
        s
    }

    #[test]
    fn resamples_from_offset_grid() {
        let f = |t: f64| (2.0 * t).sin() + 0.5 * t.cos();
        let g = read_grid_function(&csv_of(48, 0.0, f), 64).unwrap();
        let err = (0..64).map(|j| (g.samples()[j].re - f(g.theta(j))).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn rejects_ragged_grid() {
        let mut s = csv_of(16, -PI, f64::sin);
        s += "9.0,0,0\n";
        assert!(read_grid_function(&s, 32).unwrap_err().contains("uniform"));
    }
}
