use fhfm::fhfm::*;
use fhfm::metrics::*;
use fhfm::simgen::*;
use fhfm::arima::*;
fn main() {
    let grid = ArimaGrid::default();
    let (mut eo, mut ef, mut ef_ar1, mut eo2) = (0.0, 0.0, 0.0, 0.0);
    let n: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(20);
    for seed in 0..n {
        let sim = generate(&DgpSpec::new(1, 100, 100, seed)).unwrap();
        let y = &sim.panel;
        let train = y.column_range(0, 99).unwrap();
        let actual = y.values().columns(99, 1).into_owned();
        // oracle: mean of panel + b*phi*k_T
        let kt = sim.factors[(0, 98)];
        let oracle = &sim.loadings.column(0) * (0.8 * kt);
        eo += frmse(&actual, &nalgebra::DMatrix::from_column_slice(100, 1, oracle.as_slice())).unwrap();
        let kbar: f64 = (0..99).map(|t| sim.factors[(0, t)]).sum::<f64>() / 99.0;
        let ybar = fhfm::sample_mean(&train);
        let o2 = &ybar + &sim.loadings.column(0) * (0.8 * (kt - kbar));
        eo2 += frmse(&actual, &nalgebra::DMatrix::from_column_slice(100, 1, o2.as_slice())).unwrap();
        let ff = fit_fhfm(&train, &FhfmConfig::default()).unwrap();
        let fc = forecast_fhfm(&ff, 1, &grid).unwrap();
        ef += frmse(&actual, &fc.forecasts).unwrap();
        let orders: Vec<_> = fc.models.iter().map(|m| (m.order.p, m.order.d, m.order.q, m.intercept.is_some())).collect();
        // fixed AR(1)+mean for each factor
        let fac = ff.all_factors();
        let mut kf = nalgebra::DMatrix::zeros(fac.nrows(), 1);
        for i in 0..fac.nrows() {
            let s: Vec<f64> = fac.row(i).iter().copied().collect();
            let m = fit_arima(&s, 1, 0, 0, true).unwrap();
            kf[(i, 0)] = forecast_arima(&m, &s, 1).unwrap()[0];
        }
        let mut f2 = ff.all_loadings() * kf;
        { let mut c = f2.column_mut(0); c += &ff.mean; }
        ef_ar1 += frmse(&actual, &f2).unwrap();
        println!("seed {seed} orders {orders:?}");
    }
    println!("oracle-mean {:.4}", eo2 / n as f64);
    println!("oracle {:.4} fhfm {:.4} fhfm-ar1 {:.4}", eo / n as f64, ef / n as f64, ef_ar1 / n as f64);
}
