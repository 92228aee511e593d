use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use shaping4d::air::{air_mc, air_quadrature, air_sweep, gmi_maxlog, gmi_mc, snr_gain_at_rate, AwgnSpec, GmiCurve};
use shaping4d::formats::{builtin, pm_qpsk, qam8_2d};
use shaping4d::Constellation;

const N: usize = 100_000;

fn ch(snr: f64) -> AwgnSpec {
    AwgnSpec::new(snr).unwrap()
}

fn within(a: f64, sa: f64, b: f64, sb: f64) -> bool {
    (a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt()
}

/// Plain 2D bit-wise GMI of a labeled 2D constellation at unit energy per
/// complex dimension, estimated independently of the library.
fn gmi_2d_oracle(base: &[([f64; 2], u32)], snr_db: f64, n: usize, seed: u64) -> (f64, f64) {
    let es = base.iter().map(|(p, _)| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / base.len() as f64;
    let pts: Vec<[f64; 2]> = base.iter().map(|(p, _)| p.map(|v| v / es.sqrt())).collect();
    let m = (base.len() as f64).log2() as u32;
    let sigma2 = 10f64.powf(-snr_db / 10.0) / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sq) = (0.0, 0.0);
    for k in 0..n {
        let tx = k % pts.len();
        let y = [
            pts[tx][0] + sigma2.sqrt() * rng.sample::<f64, _>(StandardNormal),
            pts[tx][1] + sigma2.sqrt() * rng.sample::<f64, _>(StandardNormal),
        ];
        let q: Vec<f64> = pts
            .iter()
            .map(|p| (-((y[0] - p[0]).powi(2) + (y[1] - p[1]).powi(2)) / (2.0 * sigma2)).exp())
            .collect();
        let total: f64 = q.iter().sum();
        let mut term = m as f64;
        for b in 0..m {
            let bit = (base[tx].1 >> b) & 1;
            let same: f64 = q.iter().zip(base).filter(|(_, (_, l))| (l >> b) & 1 == bit).map(|(v, _)| v).sum();
            term -= (total / same).log2();
        }
        sum += term;
        sq += term * term;
    }
    let mean = sum / n as f64;
    (mean, ((sq / n as f64 - mean * mean) / n as f64).sqrt())
}

#[test]
fn gmi_never_exceeds_mi() {
    for name in ["table1", "pm8qam", "2a8psk", "sp12qam"] {
        let c: Constellation = builtin(name).unwrap();
        for snr in [2.0, 8.0, 14.0] {
            let p = air_mc(&c, &ch(snr), N, 3).unwrap();
            assert!(p.gmi.value <= p.mi.value + 3.0 * p.mi.stderr, "{name} {snr}: {p:?}");
        }
    }
}

#[test]
fn rotation_leaves_rates_unchanged() {
    let c: Constellation = builtin("table1").unwrap();
    let (s, co) = 0.7f64.sin_cos();
    let r = c.map_points(|p| [co * p[0] - s * p[3], p[1], p[2], s * p[0] + co * p[3]]);
    let a = air_mc(&c, &ch(8.0), N, 5).unwrap();
    let b = air_mc(&r, &ch(8.0), N, 6).unwrap();
    assert!(within(a.gmi.value, a.gmi.stderr, b.gmi.value, b.gmi.stderr), "{a:?} {b:?}");
    assert!(within(a.mi.value, a.mi.stderr, b.mi.value, b.mi.stderr), "{a:?} {b:?}");
}

#[test]
fn label_xor_and_bit_permutation_leave_rates_unchanged() {
    let c: Constellation = builtin("pm8qam").unwrap();
    let a = air_mc(&c, &ch(8.0), N, 9).unwrap();
    for v in [c.xor_labels(0b101101), c.permute_bits(&[5, 0, 3, 1, 4, 2]).unwrap()] {
        let b = air_mc(&v, &ch(8.0), N, 9).unwrap();
        assert!((a.gmi.value - b.gmi.value).abs() < 1e-9, "{a:?} {b:?}");
        assert!((a.mi.value - b.mi.value).abs() < 1e-9);
        let other_seed = air_mc(&v, &ch(8.0), N, 10).unwrap();
        assert!(within(a.gmi.value, a.gmi.stderr, other_seed.gmi.value, other_seed.gmi.stderr));
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let c: Constellation = builtin("table1").unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| air_mc(&c, &ch(8.0), 50_000, 21).unwrap())
    };
    let one = run(1);
    for t in [2, 3, 4] {
        let other = run(t);
        assert_eq!(one.gmi.value.to_bits(), other.gmi.value.to_bits());
        assert_eq!(one.mi.value.to_bits(), other.mi.value.to_bits());
        assert_eq!(one.gmi.stderr.to_bits(), other.gmi.stderr.to_bits());
    }
}

#[test]
fn polarization_multiplexed_gmi_is_twice_the_2d_gmi() {
    let c: Constellation = builtin("pm8qam").unwrap();
    let four = gmi_mc(&c, &ch(8.0), N, 2).unwrap();
    let (two, two_err) = gmi_2d_oracle(&qam8_2d::<f64>(), 8.0, N, 77);
    assert!(
        within(four.value, four.stderr, 2.0 * two, 2.0 * two_err),
        "{} vs 2 x {two}",
        four.value
    );
}

#[test]
fn rates_increase_with_snr() {
    let c: Constellation = builtin("table1").unwrap();
    let rows = air_sweep(&c, &[0.0, 3.0, 6.0, 9.0, 12.0, 15.0], 50_000, 4).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].gmi > w[0].gmi && w[1].mi > w[0].mi, "{w:?}");
    }
    assert!(rows.iter().all(|r| r.gmi <= 6.0 && r.mi <= 6.0));
}

#[test]
fn quadrature_agrees_with_monte_carlo() {
    let c: Constellation = pm_qpsk();
    let (mi, gmi) = air_quadrature(&c, &ch(3.0), 12).unwrap();
    let p = air_mc(&c, &ch(3.0), N, 8).unwrap();
    assert!((mi - p.mi.value).abs() < 3.0 * p.mi.stderr + 1e-3, "{mi} {p:?}");
    assert!((gmi - p.gmi.value).abs() < 3.0 * p.gmi.stderr + 1e-3, "{gmi} {p:?}");
    // Gray QPSK decodes its bits independently
    assert!((mi - gmi).abs() < 1e-6);
}

#[test]
fn surrogate_orders_formats_like_monte_carlo() {
    let shaped: Constellation = builtin("table1").unwrap();
    let qam: Constellation = builtin("pm8qam").unwrap();
    let a = gmi_maxlog(&shaped, &ch(8.0)).unwrap();
    let b = gmi_maxlog(&qam, &ch(8.0)).unwrap();
    assert!(a > b);
    assert!(a <= 6.0 && b <= 6.0);
}

#[test]
fn snr_gain_between_sampled_curves() {
    let grid: Vec<f64> = (0..=12).map(|k| 5.0 + 0.5 * k as f64).collect();
    let a = GmiCurve::from_sweep(&air_sweep(&builtin::<f64>("table1").unwrap(), &grid, 50_000, 1).unwrap()).unwrap();
    let b = GmiCurve::from_sweep(&air_sweep(&builtin::<f64>("pm8qam").unwrap(), &grid, 50_000, 1).unwrap()).unwrap();
    let gain = snr_gain_at_rate(&a, &b, 5.0).unwrap();
    assert!(gain > 0.3 && gain < 1.2, "{gain}");
    assert!(snr_gain_at_rate(&a, &b, 5.99).is_err());
}
