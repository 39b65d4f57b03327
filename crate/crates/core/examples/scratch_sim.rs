use fhfm::baselines::*;
use fhfm::fhfm::*;
use fhfm::metrics::*;
use fhfm::simgen::*;
use fhfm::arima::ArimaGrid;
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let ex: u8 = args[1].parse().unwrap();
    let n: u64 = args[2].parse().unwrap();
    let t0 = std::time::Instant::now();
    let grid = ArimaGrid::default();
    let mut acc = vec![0.0; 12];
    let mut ranks = std::collections::BTreeMap::new();
    for seed in 0..n {
        let sim = generate(&DgpSpec::new(ex, 100, 100, seed)).unwrap();
        let y = &sim.panel;
        let f = fit_fhfm(y, &FhfmConfig::default()).unwrap();
        *ranks.entry((f.r1(), f.r2())).or_insert(0) += 1;
        let c = fit_cpca(y, Rank::Fixed(1), false, None).unwrap();
        let d = fit_dpca(y, Rank::Fixed(1), 1, true, false, None).unwrap();
        acc[0] += residual_diag(&f.residual).unwrap().time_variance;
        acc[1] += residual_diag(&c.residual).unwrap().time_variance;
        acc[2] += residual_diag(&d.residual).unwrap().time_variance;
        for (hi, h) in [1usize, 5].iter().enumerate() {
            let train = y.column_range(0, 100 - h).unwrap();
            let actual = y.values().columns(100 - h, *h).into_owned();
            let ff = fit_fhfm(&train, &FhfmConfig::default()).unwrap();
            let e1 = frmse(&actual, &forecast_fhfm(&ff, *h, &grid).unwrap().forecasts).unwrap();
            let cf = fit_cpca(&train, Rank::Fixed(1), false, None).unwrap();
            let e2 = frmse(&actual, &forecast_baseline(&cf, *h, &grid).unwrap().forecasts).unwrap();
            let df = fit_dpca(&train, Rank::Fixed(1), 1, true, false, None).unwrap();
            let e3 = frmse(&actual, &forecast_baseline(&df, *h, &grid).unwrap().forecasts).unwrap();
            acc[3 + hi * 3] += e1; acc[4 + hi * 3] += e2; acc[5 + hi * 3] += e3;
        }
    }
    for v in acc.iter_mut() { *v /= n as f64; }
    println!("resid tv fhfm {:.4} cpca {:.4} dpca {:.4}", acc[0], acc[1], acc[2]);
    println!("frmse1 fhfm {:.4} cpca {:.4} dpca {:.4}", acc[3], acc[4], acc[5]);
    println!("frmse5 fhfm {:.4} cpca {:.4} dpca {:.4}", acc[6], acc[7], acc[8]);
    println!("ranks {:?} {:?}", ranks, t0.elapsed());
}
