use cot_lab::binary::{self, UncodedDecoder};
use cot_lab::sim::{self, EmpiricalMarginal, SimConfig};

/// Least-squares slope of `log tv` against `log samples`, averaged over seeds.
fn tv_slope(samples: &[u64], seeds: u64) -> f64 {
    let xs: Vec<f64> = samples.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = samples
        .iter()
        .map(|&n| {
            let mean_tv = (1..=seeds)
                .map(|s| {
                    let cfg = SimConfig::new(s, n, 4).unwrap();
                    sim::sim_uncoded_binary(0.5, 0.1, UncodedDecoder { a: 0.0, b: 0.0 }, &cfg).unwrap().tv_to_target.unwrap()
                })
                .sum::<f64>()
                / seeds as f64;
            mean_tv.ln()
        })
        .collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn marginal_tv_shrinks_like_inverse_sqrt() {
    let samples: Vec<u64> = (0..6).map(|k| 10_000u64 << k).collect();
    let slope = tv_slope(&samples, 64);
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn reports_are_worker_independent() {
    let one = SimConfig::new(5, 70_000, 1).unwrap();
    let many = SimConfig::new(5, 70_000, 6).unwrap();
    let dec = binary::d_uncoded(0.3, 0.2).unwrap().1;
    assert_eq!(
        sim::sim_uncoded_binary(0.3, 0.2, dec, &one).unwrap(),
        sim::sim_uncoded_binary(0.3, 0.2, dec, &many).unwrap()
    );
    assert_eq!(
        sim::sim_uncoded_gaussian(&[2.0, 1.0, 0.5], 3.0, &one).unwrap(),
        sim::sim_uncoded_gaussian(&[2.0, 1.0, 0.5], 3.0, &many).unwrap()
    );
    assert_eq!(
        sim::sim_genie_hybrid_binary(0.25, 0.2, 0.1, &one).unwrap(),
        sim::sim_genie_hybrid_binary(0.25, 0.2, 0.1, &many).unwrap()
    );
}

#[test]
fn seeds_change_samples() {
    let a = sim::sim_genie_hybrid_binary(0.25, 0.2, 0.1, &SimConfig::new(1, 10_000, 2).unwrap()).unwrap();
    let b = sim::sim_genie_hybrid_binary(0.25, 0.2, 0.1, &SimConfig::new(2, 10_000, 2).unwrap()).unwrap();
    assert_ne!(a.mean_distortion, b.mean_distortion);
}

#[test]
fn gaussian_report_carries_power_and_moments() {
    let lambdas = [1.5, 0.5];
    let r = sim::sim_uncoded_gaussian(&lambdas, 2.0, &SimConfig::new(3, 200_000, 4).unwrap()).unwrap();
    assert!(r.channel_power.unwrap().within(2.0, 4.0));
    match r.empirical_marginal {
        EmpiricalMarginal::Moments { second_moments } => {
            for (m, l) in second_moments.iter().zip(lambdas) {
                assert!(m.within(l, 4.0), "{m:?} vs {l}");
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn report_json_roundtrip() {
    let r = sim::sim_uncoded_binary(0.25, 0.1, binary::d_uncoded(0.25, 0.1).unwrap().1, &SimConfig::new(9, 1000, 1).unwrap())
        .unwrap();
    let text = serde_json::to_string(&r).unwrap();
    assert_eq!(serde_json::from_str::<sim::SimReport>(&text).unwrap(), r);
}
