use modeport::protocol::fidelity_closed;
use modeport::resources::{double_well_ground, imbalance_moments, BoseHubbardParams};

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Each attractive peak is a Gaussian of variance 1 / (ν |γ| sqrt(γ² - 1)).
#[test]
fn attractive_peak_variance_matches_gaussian_width() {
    let gamma = -2.0;
    for nu in [400usize, 1600] {
        let rho = double_well_ground(&BoseHubbardParams::from_gamma(nu, 1.0, gamma)).unwrap();
        let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (k, p) in rho.populations().iter().enumerate() {
            let z = 1.0 - 2.0 * k as f64 / nu as f64;
            if z > 0.0 {
                w += p;
                m1 += p * z;
                m2 += p * z * z;
            }
        }
        let var = m2 / w - (m1 / w).powi(2);
        let predicted = 1.0 / (nu as f64 * gamma.abs() * (gamma * gamma - 1.0).sqrt());
        assert!((var / predicted - 1.0).abs() < 0.2, "nu={nu}: {var:e} vs {predicted:e}");
    }
}

/// At the critical coupling the imbalance width shrinks as ν^(-1/3), and the
/// fidelity deficit falls like that of a Gaussian of width ν^(2/3).
#[test]
fn critical_coupling_scales_with_cube_root() {
    let nus = [200usize, 400, 800, 1600, 3200];
    let (mut lx, mut lvar, mut ldef) = (vec![], vec![], vec![]);
    for &nu in &nus {
        let rho = double_well_ground(&BoseHubbardParams::from_gamma(nu, 1.0, -1.0)).unwrap();
        lx.push((nu as f64).ln());
        lvar.push(imbalance_moments(&rho).1.ln());
        ldef.push((1.0 - fidelity_closed(&rho, 1).unwrap()).ln());
    }
    let sv = slope(&lx, &lvar);
    let sd = slope(&lx, &ldef);
    assert!((sv + 2.0 / 3.0).abs() < 0.05, "variance slope {sv}");
    assert!((sd + 4.0 / 3.0).abs() < 0.1, "deficit slope {sd}");
}
