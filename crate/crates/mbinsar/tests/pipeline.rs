//! End-to-end run of the full toolkit the way the CLI drives it: synthesize
//! a noisy stack, push it through files, unwrap, estimate jointly, and score
//! the heights against the truth scene.

use mbinsar::design::configuration_chain;
use mbinsar::estimate::{build_joint_model, estimate_heights_only, solve_joint, ModelKind};
use mbinsar::geometry::{BaselineConfiguration, BaselineMode, RadarGeometry};
use mbinsar::io::{
    read_stack, read_unwrap_summary, read_unwrapped_field, write_stack, write_unwrap_summary,
    write_unwrapped_field, UnwrapSummary,
};
use mbinsar::metrics::compare;
use mbinsar::scene::{blocks_scene, ramp_scene, Block};
use mbinsar::simulate::simulate_stack;
use mbinsar::unwrap::asymptotic_unwrap;

#[test]
fn noisy_stack_through_files_to_scored_heights() {
    let dir = tempfile::tempdir().unwrap();
    let mut geom = RadarGeometry::x_band_tandem();
    geom.range_spacing = 10.0;
    let scene = blocks_scene(
        &ramp_scene(64, 64, 40.0).unwrap(),
        &[Block { row0: 12, col0: 20, rows: 24, cols: 18, height: 20.0 }],
    )
    .unwrap();
    let cfg = BaselineConfiguration::new(BaselineMode::Config2, 15.0, 150.0);
    let seed = 11;

    // 0.999 keeps the bootstrap failure odds negligible on a 64x64 grid so the
    // score below reflects phase noise alone. Failure-rate statistics have
    // their own tests; this one checks the wiring between the stages.
    let (stack, warnings) = simulate_stack(&scene, &geom, &cfg, 0.999, None, None, seed).unwrap();
    assert!(warnings.is_empty(), "unexpected warnings: {warnings:?}");
    let stack = stack.with_reference_pixel((32, 0)).unwrap();

    let manifest = write_stack(dir.path().join("stack"), &stack, seed).unwrap();
    let (loaded, loaded_seed) = read_stack(&manifest).unwrap();
    assert_eq!(loaded_seed, seed);
    assert_eq!(loaded.reference_pixel, stack.reference_pixel);

    let chain = configuration_chain(&cfg).unwrap();
    let unwrapped = asymptotic_unwrap(&loaded, &chain).unwrap();
    assert!(
        unwrapped.link_failures.iter().all(|&f| f <= 0.01),
        "link failures {:?}",
        unwrapped.link_failures
    );

    let mut fields = Vec::new();
    for (k, field) in unwrapped.fields.iter().enumerate() {
        let path = dir.path().join(format!("unwrapped_{k:02}.csv"));
        write_unwrapped_field(&path, field).unwrap();
        fields.push(read_unwrapped_field(&path).unwrap());
        assert_eq!(fields[k].phase, field.phase);
    }
    let summary = UnwrapSummary {
        schema_version: mbinsar::io::SCHEMA_VERSION,
        residue_count: fields.iter().map(|f| f.residue_count).sum(),
        link_failure_fractions: unwrapped.link_failures.clone(),
    };
    let summary_path = dir.path().join("summary.json");
    write_unwrap_summary(&summary_path, &summary).unwrap();
    assert_eq!(
        read_unwrap_summary(&summary_path).unwrap().link_failure_fractions,
        unwrapped.link_failures
    );

    let model = build_joint_model(&loaded, &fields, None, ModelKind::Bistatic).unwrap();
    let joint = solve_joint(&model).unwrap();
    assert!(joint.residual_rms < 0.2, "residual rms {}", joint.residual_rms);

    // No orbit error was injected, so the heights-only estimator is the one a
    // user would score here. The joint solve above only has to stay consistent
    // in the phase domain; on a swath this narrow its orbit columns are close
    // to collinear and its height accuracy is not a meaningful check.
    // Heights come out relative to the reference pixel, and that pixel's own
    // phase noise shifts the datum by up to a few times 0.15 m (0.032 rad at
    // 4.6 m/rad for the 165 m member). The bands below allow a 4 sigma datum
    // draw on top of the per-pixel noise.
    let result = estimate_heights_only(&loaded, &fields).unwrap();
    let report = compare(&result.heights, &scene, false).unwrap();
    assert_eq!(report.coverage, 1.0);
    assert!(
        report.rmse > 0.03 && report.rmse < 0.7,
        "heights-only rmse {} m outside the expected noise band",
        report.rmse
    );
    assert!(report.mean_error.abs() < 0.65, "mean error {} m", report.mean_error);
}

#[test]
fn repeated_seed_writes_identical_stacks() {
    let dir = tempfile::tempdir().unwrap();
    let geom = RadarGeometry::x_band_tandem();
    let scene = ramp_scene(24, 24, 15.0).unwrap();
    let cfg = BaselineConfiguration::new(BaselineMode::Config1, 15.0, 200.0);
    let mut manifests = Vec::new();
    for run in 0..2 {
        let (stack, _) = simulate_stack(&scene, &geom, &cfg, 0.95, None, None, 99).unwrap();
        let out = dir.path().join(format!("run{run}"));
        manifests.push(write_stack(&out, &stack, 99).unwrap());
    }
    let a = std::fs::read(&manifests[0]).unwrap();
    let b = std::fs::read(&manifests[1]).unwrap();
    assert_eq!(a, b);
    for k in 0..3 {
        let name = format!("interferogram_{k:02}.csv");
        let a = std::fs::read(manifests[0].parent().unwrap().join(&name)).unwrap();
        let b = std::fs::read(manifests[1].parent().unwrap().join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}
