use lti_towers::models::make_heatwave_system;
use lti_towers::observability::{defect_scan, observability_test, InputSubspace, ObservabilitySetup};

fn main() {
    for n in [0i32, 1, 2] {
        for kmax in [10i64, 40] {
            let (sys, _) = make_heatwave_system::<f64>(5, kmax, false).unwrap();
            let setup = ObservabilitySetup {
                system: &sys,
                state_index: n,
                input_index: n,
                horizon: 1.0,
                output_modes: None,
                initial_modes: None,
                input_subspace: InputSubspace::Full,
            };
            let (c, report) = observability_test(&setup, 64).unwrap();
            let single = report
                .per_mode
                .iter()
                .map(|r| r.denominator / r.numerator)
                .fold(0.0f64, f64::max);
            println!("N={n} kmax={kmax}: gevp={c:.6e} single={single:.6e}");
        }
        let (sys, _) = make_heatwave_system::<f64>(5, 40, false).unwrap();
        let scan = defect_scan(&sys, n as u32, 5..=40, 1.0).unwrap();
        println!(
            "N={n} raw slope {:.4} corrected slope {:.4}",
            scan.raw_fit.unwrap().slope,
            scan.fit.unwrap().slope
        );
    }
}
