//! How often an ideal random-matrix ensemble passes the chaotic-limit
//! ensemble thresholds (sup |delta N - prediction| < 0.1 on [0.2, 3],
//! first-level KS < 0.08) at a given number of spectra.
//!
//! Each synthetic spectrum goes through the same protocol as a model block:
//! a window of 60 (61 for one zero mode) levels nearest zero, unfolded by the
//! mean spacing of the full window. CI shares the BDI1 predictions and is not
//! sampled separately.
//!
//! ```text
//! cargo run --release --example ensemble_power -- --spectra 121 --trials 400
//! ```

use clap::Parser;
use coupled_tops::rmt::sampling::{chgoe_singular_values, goe_dense_spectrum};
use coupled_tops::rmt::{delta_n_prediction, gap_cdf, uniform_grid, SymmetryClassId};
use coupled_tops::stats::{cdf_on_grid, delta_n_from_levels, ks_distance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MATRIX_SIZE: usize = 200;
const DELTA_N_TOL: f64 = 0.1;
const KS_TOL: f64 = 0.08;

#[derive(Parser)]
struct Args {
    /// Spectra per synthetic ensemble.
    #[arg(long, default_value_t = 121)]
    spectra: usize,
    /// Synthetic ensembles per class.
    #[arg(long, default_value_t = 400)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn window_unfolded(id: SymmetryClassId, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match id {
        SymmetryClassId::AiGoe => {
            let mut d = goe_dense_spectrum(rng, MATRIX_SIZE);
            d.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
            let mut w = d[..60].to_vec();
            w.sort_by(f64::total_cmp);
            let spacing = (w[59] - w[0]) / 59.0;
            w.into_iter().filter(|&x| x > 0.0).map(|x| x / spacing).collect()
        }
        _ => {
            let nu = usize::from(id == SymmetryClassId::Bdi1);
            let positive: Vec<f64> =
                chgoe_singular_values(rng, MATRIX_SIZE, nu, 31).into_iter().filter(|&x| x > 1e-9).take(30).collect();
            // The window is mirror symmetric, so its width is twice the largest level.
            let spacing = 2.0 * positive[29] / (59 + nu) as f64;
            positive.into_iter().map(|x| x / spacing).collect()
        }
    }
}

fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[((s.len() - 1) as f64 * q).round() as usize]
}

fn main() {
    let args = Args::parse();
    let grid = uniform_grid(3.0, 301);
    println!("{} spectra per ensemble, {} ensembles per class", args.spectra, args.trials);
    for id in [SymmetryClassId::Bdi0, SymmetryClassId::Bdi1, SymmetryClassId::AiGoe] {
        let dn_pred = delta_n_prediction(id, &grid).values;
        let gap_pred: Vec<f64> = grid.iter().map(|&e| gap_cdf(id, e)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let (mut devs, mut kss) = (Vec::new(), Vec::new());
        for _ in 0..args.trials {
            let spectra: Vec<Vec<f64>> = (0..args.spectra).map(|_| window_unfolded(id, &mut rng)).collect();
            let dn = delta_n_from_levels(&spectra, &grid);
            let dev = grid
                .iter()
                .zip(dn.iter().zip(&dn_pred))
                .filter(|(e, _)| **e >= 0.2)
                .map(|(_, (a, b))| (a - b).abs())
                .fold(0.0, f64::max);
            let firsts: Vec<f64> = spectra.iter().map(|s| s[0]).collect();
            devs.push(dev);
            kss.push(ks_distance(&cdf_on_grid(&firsts, &grid), &gap_pred));
        }
        let n = args.trials as f64;
        let pass_dev = devs.iter().filter(|&&d| d < DELTA_N_TOL).count() as f64 / n;
        let pass_ks = kss.iter().filter(|&&k| k < KS_TOL).count() as f64 / n;
        let pass_both = devs.iter().zip(&kss).filter(|(d, k)| **d < DELTA_N_TOL && **k < KS_TOL).count() as f64 / n;
        println!(
            "{id:>7}: delta N dev median {:.3}, q90 {:.3}, P(< {DELTA_N_TOL}) = {pass_dev:.2}; \
             KS median {:.3}, q90 {:.3}, P(< {KS_TOL}) = {pass_ks:.2}; both {pass_both:.2}",
            quantile(&devs, 0.5),
            quantile(&devs, 0.9),
            quantile(&kss, 0.5),
            quantile(&kss, 0.9),
        );
    }
}
