// Each example is compiled in as a module and its `run_example` checked.

mod sample_noise {
    include!("../examples/sample_noise.rs");
}
mod density {
    include!("../examples/density.rs");
}
mod fit_outlier {
    include!("../examples/fit_outlier.rs");
}
mod sandwich {
    include!("../examples/sandwich.rs");
}
mod outlier_study {
    include!("../examples/outlier_study.rs");
}
mod sigma_selection {
    include!("../examples/sigma_selection.rs");
}
mod rate_study {
    include!("../examples/rate_study.rs");
}

#[test]
fn sample_noise_example() {
    let s = sample_noise::run_example().unwrap();
    assert!(s.ecf_gap <= 5.0 / (s.n as f64).sqrt());
    assert!(s.median.abs() < 0.02);
    assert!((s.tail_fraction - 0.02951672353008666).abs() < 0.002);
}

#[test]
fn density_example() {
    for (alpha, mass) in density::run_example().unwrap() {
        assert!((mass - 1.0).abs() < 1e-6, "alpha {alpha}: {mass}");
    }
}

#[test]
fn fit_outlier_example() {
    let f = fit_outlier::run_example().unwrap();
    let c = f.mccr.hypothesis.coefficients();
    assert!((c[1] - 1.0).abs() < 1e-3 && c[0].abs() < 1e-3);
    assert!((f.ols.hypothesis.coefficients()[1] - 1.0).abs() > 10.0);
    assert!(f.mccr.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn sandwich_example() {
    let reports = sandwich::run_example().unwrap();
    assert_eq!(reports.len(), 12);
    assert!(reports.iter().all(|r| r.holds()));
}

#[test]
fn outlier_study_example() {
    let (dirty, clean) = outlier_study::run_example().unwrap();
    assert!(dirty.ratio_at(4096).unwrap() < 0.2);
    let r = clean.ratio_at(4096).unwrap();
    assert!((0.5..=2.0).contains(&r), "clean ratio {r}");
}

#[test]
fn sigma_selection_example() {
    let (sel, err) = sigma_selection::run_example().unwrap();
    assert!(sel.scores.iter().all(Option::is_some));
    assert!(err < 0.05);
}

#[test]
fn rate_study_specs_run_small() {
    for mut spec in [
        rate_study::gaussian_study().unwrap(),
        rate_study::cauchy_study().unwrap(),
        rate_study::contaminated_study().unwrap(),
    ] {
        spec.validate().unwrap();
        spec.sizes = vec![128, 512];
        spec.trials = 3;
        let res = mccr::experiments::run_rate_study(&spec).unwrap();
        assert_eq!(res.records.len(), 2 * 3 * 2);
        rate_study::report("small", &res);
    }
}
