use crate::error::{Error, Result};

/// Continuum solution family `ln(32 l^2 / (4 + l^2 |x - x0|^2)^2)` of
/// `Lap u + e^u = 0` on the plane, each member with total energy `8 pi`.
pub fn bubble(x: [f64; 2], x0: [f64; 2], lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!("bubble needs lambda > 0, got {lambda}")));
    }
    let r2 = (x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2);
    let l2 = lambda * lambda;
    Ok((32.0 * l2).ln() - 2.0 * (4.0 + l2 * r2).ln())
}

/// Unit-cell Riemann sum of `e^bubble` centred at the origin over the
/// lattice square `[-half_width, half_width]^2`.
pub fn bubble_lattice_energy(lambda: f64, half_width: i64) -> Result<f64> {
    bubble([0.0, 0.0], [0.0, 0.0], lambda)?;
    let mut total = 0.0;
    for i in -half_width..=half_width {
        let mut row = 0.0;
        for j in -half_width..=half_width {
            row += bubble([i as f64, j as f64], [0.0, 0.0], lambda)?.exp();
        }
        total += row;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_values() {
        let l = 0.5f64.sqrt();
        assert!(bubble([0.0, 0.0], [0.0, 0.0], l).unwrap().abs() < 1e-15);
        for l in [0.1, 1.0, 3.0] {
            let v = bubble([2.0, -1.0], [2.0, -1.0], l).unwrap();
            assert!((v - (2.0 * l * l).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn radial_and_decreasing() {
        let x0 = [1.0, 1.0];
        let a = bubble([4.0, 1.0], x0, 0.7).unwrap();
        let b = bubble([1.0, -2.0], x0, 0.7).unwrap();
        let c = bubble([-2.0, 1.0], x0, 0.7).unwrap();
        assert!((a - b).abs() < 1e-14 && (a - c).abs() < 1e-14);
        let mut last = f64::INFINITY;
        for r in 0..20 {
            let v = bubble([1.0 + r as f64, 1.0], x0, 0.7).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        assert!(bubble([0.0, 0.0], [0.0, 0.0], 0.0).is_err());
        assert!(bubble([0.0, 0.0], [0.0, 0.0], -1.0).is_err());
    }
}
