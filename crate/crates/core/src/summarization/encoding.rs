use crate::error::{Error, Result};

/// Sinusoidal position table with the usual 10000 base:
/// `pe[pos][2i] = sin(pos / 10000^(2i/d))`, `pe[pos][2i+1] = cos(...)`.
pub fn sinusoidal_pe(positions: usize, d: usize) -> Result<Vec<Vec<f64>>> {
    if d == 0 || !d.is_multiple_of(2) {
        return Err(Error::Input(format!("encoding width must be even and positive, got {d}")));
    }
    let freqs: Vec<f64> = (0..d / 2)
        .map(|i| 10000f64.powf(-((2 * i) as f64) / d as f64))
        .collect();
    Ok((0..positions)
        .map(|pos| {
            let mut row = Vec::with_capacity(d);
            for f in &freqs {
                let angle = pos as f64 * f;
                row.push(angle.sin());
                row.push(angle.cos());
            }
            row
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_row_alternates() {
        let pe = sinusoidal_pe(3, 6).unwrap();
        assert_eq!(pe[0], vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn known_value() {
        let pe = sinusoidal_pe(2, 4).unwrap();
        assert!((pe[1][0] - 0.841_471).abs() < 1e-6);
        // second pair uses 10000^(-1/2) = 0.01
        assert!((pe[1][2] - 0.01f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn bounded_and_odd_rejected() {
        let pe = sinusoidal_pe(500, 16).unwrap();
        assert!(pe.iter().flatten().all(|v| (-1.0..=1.0).contains(v)));
        assert!(sinusoidal_pe(4, 3).is_err());
    }
}
