//! Scratch calibration harness (not part of the suite; run with
//! `cargo test --test calibrate -- --ignored --nocapture`).

use emtboost::boost::{CvGrid, FitConfig};
use emtboost::em::{em_fit, EmConfig};
use emtboost::metrics::mad_suite;
use emtboost::simgen;

fn config(seed: u64) -> EmConfig {
    let shrinkage: f64 = std::env::var("CAL_NU").map_or(0.1, |v| v.parse().unwrap());
    let max_trees: usize = std::env::var("CAL_M").map_or(400, |v| v.parse().unwrap());
    let min_node: usize = std::env::var("CAL_MIN").map_or(10, |v| v.parse().unwrap());
    let max_iters: usize = std::env::var("CAL_IT").map_or(100, |v| v.parse().unwrap());
    let tol: f64 = std::env::var("CAL_TOL").map_or(1e-8, |v| v.parse().unwrap());
    EmConfig {
        max_iters,
        ll_rel_tol: tol,
        boost: FitConfig {
            num_trees: max_trees,
            leaves: 6,
            shrinkage,
            min_node_obs: min_node,
            cv_folds: 5,
            seed,
        },
        cv: Some(CvGrid {
            max_trees,
            leaves: vec![2, 3, 4, 5, 6],
        }),
        cv_every_iteration: std::env::var("CAL_CVE").is_ok(),
        ..EmConfig::default()
    }
}

#[test]
#[ignore]
fn calibrate_case1_1() {
    let qs: Vec<f64> = std::env::var("CAL_Q").map_or(vec![1.0, 0.5, 0.25], |v| {
        v.split(',').map(|s| s.parse().unwrap()).collect()
    });
    for q in qs {
        let mut td_mads = Vec::new();
        let mut emt_mads = Vec::new();
        let mut q_hats = Vec::new();
        let max_seed: u64 = std::env::var("CAL_SEEDS").map_or(5, |v| v.parse().unwrap());
        for seed in 1u64..=max_seed {
            let train = simgen::generate_case1_1(500, 1.0, 1.5, q, seed);
            let test = simgen::generate_case1_1(1200, 1.0, 1.5, q, seed ^ 0xffff);
            let t0 = std::time::Instant::now();

            let mut cfg = config(seed);
            cfg.q_fixed = Some(1.0);
            let td = em_fit(&train, 1.5, &cfg).unwrap();
            let td_pred = td.predict_premium(test.x()).unwrap();
            let td_mad = mad_suite(test.y(), &td_pred, test.true_premium()).mad;

            let mut cfg = config(seed);
            cfg.q_fixed = None;
            let emt = em_fit(&train, 1.5, &cfg).unwrap();
            let emt_pred = emt.predict_premium(test.x()).unwrap();
            let emt_mad = mad_suite(test.y(), &emt_pred, test.true_premium()).mad;

            println!(
                "q={q} seed={seed}: TD mad={td_mad:.4} (M={} L={}), EMT mad={emt_mad:.4} (M={} L={}, qhat={:.3}, iters={}) [{:?}]",
                td.ensemble.trees.len(),
                leaves_of(&td),
                emt.ensemble.trees.len(),
                leaves_of(&emt),
                emt.q,
                emt.fit_trace.len(),
                t0.elapsed()
            );
            td_mads.push(td_mad);
            emt_mads.push(emt_mad);
            q_hats.push(emt.q);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "== q={q}: TD mean {:.4}, EMT mean {:.4}, qhat mean {:.4}\n",
            mean(&td_mads),
            mean(&emt_mads),
            mean(&q_hats)
        );
    }
}

fn leaves_of(model: &emtboost::em::ZifModel) -> usize {
    model
        .ensemble
        .trees
        .first()
        .map_or(0, |t| t.leaf_count())
}

#[test]
#[ignore]
fn calibrate_case1_2_qhat() {
    for q in [0.75, 0.25] {
        let mut q_hats = Vec::new();
        for seed in 1u64..=5 {
            let spec = simgen::rfg_draw(10, seed.wrapping_mul(0x9e37));
            let train = simgen::generate_case1_2(1000, 10, 1.0, 1.5, q, &spec, seed);
            let t0 = std::time::Instant::now();
            let cfg = config(seed);
            let emt = em_fit(&train, 1.5, &cfg).unwrap();
            println!(
                "q={q} seed={seed}: qhat={:.3} (M={}, iters={}) [{:?}]",
                emt.q,
                emt.ensemble.trees.len(),
                emt.fit_trace.len(),
                t0.elapsed()
            );
            q_hats.push(emt.q);
        }
        println!(
            "== q={q}: qhat mean {:.4}\n",
            q_hats.iter().sum::<f64>() / q_hats.len() as f64
        );
    }
}
