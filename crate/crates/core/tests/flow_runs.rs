use arcflow::diagnostics::enclosed_area;
use arcflow::*;

#[test]
fn single_precision_stationary_arc_stays_put() {
    let sigma = Support32::circle(1.0).unwrap();
    let initial: State32 = InitialSpec::OrthogonalArc {
        rho: 1.0,
        center_angle: 0.0,
    }
    .build(&sigma, 100)
    .unwrap();
    let config = FlowConfig {
        n_nodes: 100,
        t_end: 1e3,
        stop_tolerance: f64::MIN_POSITIVE,
        max_steps: Some(1000),
        ..FlowConfig::default()
    };
    let tr = run(
        initial.clone(),
        &sigma,
        &config,
        FlowMode::AreaPreserving,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(tr.termination, Termination::MaxSteps);
    let drift = tr.final_state.curve.hausdorff(&initial.curve);
    assert!(drift < 1e-4, "{drift}");
}

#[test]
fn perturbed_arc_on_an_ellipse_converges_with_conserved_area() {
    let sigma = Support64::ellipse(1.5, 1.0).unwrap();
    let initial: State64 = InitialSpec::PerturbedArc {
        rho: 0.02,
        center_angle: 0.7,
        amplitude: 0.04,
        frequency: 2,
        seed: 3,
        skew: 0.2,
    }
    .build(&sigma, 120)
    .unwrap();
    let rep = check_admissibility(&initial.curve, &sigma).unwrap();
    assert!(rep.admissible(), "{rep:?}");
    let a0 = enclosed_area(&initial.curve, &sigma, initial.lift().unwrap()).unwrap();
    let config = FlowConfig {
        n_nodes: 120,
        ..FlowConfig::default()
    };
    let options = RunOptions {
        sample_interval: 1e-4,
        ..RunOptions::default()
    };
    let tr = run(initial, &sigma, &config, FlowMode::AreaPreserving, &options).unwrap();
    assert_eq!(tr.termination, Termination::Converged);
    let last = &tr.final_state;
    let a1 = enclosed_area(&last.curve, &sigma, last.lift().unwrap()).unwrap();
    assert!((a1 - a0).abs() < 1e-4 * a0, "{a0} {a1}");
    assert!(
        tr.records.iter().all(|r| r.flags.all_ok()),
        "{:?}",
        tr.records.iter().find(|r| !r.flags.all_ok())
    );
    let fit = fit_circular_arc(&last.curve);
    assert!(fit.rms < 1e-3 * fit.radius);
    let (ca, cb) = diagnostics::contact_angles(&last.curve, &sigma, last.lift().unwrap());
    assert!(
        (ca - 90.0).abs() < 0.5 && (cb - 90.0).abs() < 0.5,
        "{ca} {cb}"
    );
}

#[test]
fn records_are_chronological_and_serializable() {
    let sigma = Support64::circle(1.0).unwrap();
    let initial: State64 = InitialSpec::Circle {
        radius: 1.0,
        center: [0.0, 0.0],
    }
    .build(&sigma, 64)
    .unwrap();
    let config = FlowConfig {
        n_nodes: 64,
        t_end: 0.05,
        ..FlowConfig::default()
    };
    let tr = run(
        initial,
        &sigma,
        &config,
        FlowMode::Csf,
        &RunOptions::default(),
    )
    .unwrap();
    assert!(tr.records.windows(2).all(|w| w[1].t > w[0].t));
    assert!(tr
        .records
        .iter()
        .all(|r| r.flags.kappa_bar_in_window.is_none()));
    let json = serde_json::to_string(&tr.records[3]).unwrap();
    let back: DiagnosticsRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, tr.records[3]);
    let state_json = serde_json::to_string(&tr.final_state).unwrap();
    let state: State64 = serde_json::from_str(&state_json).unwrap();
    assert_eq!(state, tr.final_state);
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    let sigma = Support64::circle(1.0).unwrap();
    let initial: State64 = InitialSpec::OrthogonalArc {
        rho: 0.1,
        center_angle: 0.0,
    }
    .build(&sigma, 50)
    .unwrap();
    let config = FlowConfig {
        dt_safety: 1.5,
        ..FlowConfig::default()
    };
    let err = run(
        initial,
        &sigma,
        &config,
        FlowMode::AreaPreserving,
        &RunOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, FlowError::InvalidInput(_)));
}
