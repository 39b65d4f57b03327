use fhfm::arima::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
fn main() {
    let t0 = std::time::Instant::now();
    let (mut hit_phi, mut hit_sel) = (0, 0);
    let mut counts = std::collections::BTreeMap::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prev: f64 = Distribution::<f64>::sample(&StandardNormal, &mut rng) / 0.6;
        let x: Vec<f64> = (0..500).map(|_| { prev = 0.8 * prev + Distribution::<f64>::sample(&StandardNormal, &mut rng); prev }).collect();
        let m = fit_arima(&x, 1, 0, 0, true).unwrap();
        if (m.ar[0] - 0.8).abs() <= 0.1 { hit_phi += 1; }
        let a = auto_arima(&x, &ArimaGrid::default()).unwrap();
        *counts.entry((a.order.p, a.order.d, a.order.q, a.intercept.is_some())).or_insert(0) += 1;
        if a.order.p == 1 && a.order.d == 0 { hit_sel += 1; }
    }
    println!("{hit_phi} {hit_sel} {:?} {:?}", counts, t0.elapsed());
}
