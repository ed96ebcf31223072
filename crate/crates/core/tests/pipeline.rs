use hsstab::harness::{sweep, ExperimentConfig};
use hsstab::presentation::{
    relation_defect, GroupPresentation, PresentationFile, TupleFile, UnitaryTuple,
};
use hsstab::stabilize::{
    perturb, sample_exact_rep, stabilize, stabilize_case2, stabilize_chain, StabilityRecord,
    StabilizeOptions,
};
use hsstab::{Complex64, ComplexMatrix, Error};

#[test]
fn tuple_survives_a_file_round_trip() {
    let p = GroupPresentation::parse_preset("hnn:2,3:3,2").unwrap();
    let t = perturb(&sample_exact_rep(&p, 9, 3).unwrap(), 1e-3, 4).unwrap();
    let text = serde_json::to_string(&TupleFile::new(Some(&p), &t)).unwrap();
    let back: TupleFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back.presentation.as_deref(), Some("hnn:2,3:3,2"));
    let back = back.into_tuple(1e-8).unwrap();
    assert_eq!(back, t);
    let (fixed, record) = stabilize(&p, &back, &StabilizeOptions::default()).unwrap();
    assert!(record.defect_after.unwrap() < 1e-9);
    assert!(relation_defect(&p, &fixed).unwrap() < 1e-9);
}

#[test]
fn presentation_file_round_trip() {
    for label in ["chain:2,5:3,7", "hnn:2,3:3,2", "heisenberg"] {
        let p = GroupPresentation::parse_preset(label).unwrap();
        let text = serde_json::to_string(&PresentationFile::from(&p)).unwrap();
        let file: PresentationFile = serde_json::from_str(&text).unwrap();
        let back = GroupPresentation::try_from(file).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.label(), label);
    }
}

#[test]
fn correctors_check_the_presentation_kind() {
    let chain = GroupPresentation::parse_preset("chain:2:2").unwrap();
    let hnn = GroupPresentation::parse_preset("hnn:2:2").unwrap();
    let t = sample_exact_rep(&chain, 4, 1).unwrap();
    assert!(stabilize_chain(&chain, &t, &StabilizeOptions::default()).is_ok());
    assert!(matches!(
        stabilize_case2(&chain, &t, &StabilizeOptions::default()),
        Err(Error::InvalidPresentation(_))
    ));
    let u = sample_exact_rep(&hnn, 4, 1).unwrap();
    assert!(stabilize_case2(&hnn, &u, &StabilizeOptions::default()).is_ok());
    let heis = GroupPresentation::parse_preset("heisenberg").unwrap();
    assert!(stabilize(&heis, &t, &StabilizeOptions::default()).is_err());
}

#[test]
fn non_unitary_input_fails_at_the_input_stage() {
    let p = GroupPresentation::parse_preset("chain:2:2").unwrap();
    let mut t = sample_exact_rep(&p, 3, 1).unwrap();
    t.matrices[1] *= Complex64::new(1.1, 0.0);
    let err = stabilize(&p, &t, &StabilizeOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "input", .. }), "{err}");
}

#[test]
fn wrong_generator_count_is_rejected() {
    let p = GroupPresentation::parse_preset("chain:2,5:3,7").unwrap();
    let t = UnitaryTuple::identity(2, 3);
    assert!(matches!(
        stabilize(&p, &t, &StabilizeOptions::default()),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn scalar_tuple_in_dimension_one() {
    let p = GroupPresentation::parse_preset("chain:2:2").unwrap();
    let t = UnitaryTuple::new(
        vec![
            ComplexMatrix::from_element(1, 1, Complex64::from_polar(1.0, 0.3)),
            ComplexMatrix::from_element(1, 1, Complex64::from_polar(1.0, -0.2)),
        ],
        1e-12,
    )
    .unwrap();
    let (fixed, record) = stabilize(&p, &t, &StabilizeOptions::default()).unwrap();
    assert!(record.defect_after.unwrap() < 1e-12);
    let (x, y) = (fixed.matrices[0][(0, 0)], fixed.matrices[1][(0, 0)]);
    assert!((x * x - y * y).norm() < 1e-12);
}

#[test]
fn sweep_records_serialize_as_json_lines() {
    let mut config = ExperimentConfig::new("chain:2,5:3,7", vec![5, 10], vec![1e-3], 2, 8);
    config.timing = false;
    let report = sweep(&config).unwrap();
    assert_eq!(report.records.len(), 4);
    for r in &report.records {
        let line = serde_json::to_string(r).unwrap();
        assert!(!line.contains('\n'));
        let back: StabilityRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(&back, r);
    }
    let text = serde_json::to_string(&config).unwrap();
    let parsed: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, config);
    assert!(serde_json::from_str::<ExperimentConfig>(
        r#"{"preset": "chain:2:2", "dims": [4], "eps": [0.1], "trials": 1, "seed": 0, "bogus": 1}"#
    )
    .is_err());
}

#[test]
fn options_are_validated() {
    let p = GroupPresentation::parse_preset("chain:2:2").unwrap();
    let t = sample_exact_rep(&p, 4, 2).unwrap();
    for opts in [
        StabilizeOptions {
            max_clusters: Some(0),
            ..Default::default()
        },
        StabilizeOptions {
            gap_tol: Some(-1.0),
            ..Default::default()
        },
    ] {
        assert!(matches!(
            stabilize(&p, &t, &opts),
            Err(Error::InvalidArgument(_))
        ));
    }
    let gap = StabilizeOptions {
        gap_tol: Some(0.3),
        ..Default::default()
    };
    let noisy = perturb(&t, 1e-3, 1).unwrap();
    assert!(stabilize(&p, &noisy, &gap).unwrap().1.defect_after.unwrap() < 1e-9);
}
