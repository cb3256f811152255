use mimo_outage::model::Model;
use mimo_outage_py::build;

#[test]
fn model_inferred_from_spectra() {
    let (s, cfg) = build(3, 2, 2.0, 10.0, None, None, Some(vec![1.5, 0.5]), None).unwrap();
    assert_eq!(s.model, Model::SemiRx);
    assert_eq!((cfg.n_t(), cfg.n_r()), (3, 2));
    let (s, _) = build(2, 2, 1.0, 0.0, None, None, None, None).unwrap();
    assert_eq!(s.model, Model::Independent);
}

#[test]
fn explicit_model_and_allocation() {
    let (s, _) = build(
        3,
        3,
        3.0,
        15.0,
        Some("full"),
        Some(vec![1.3, 1.0, 0.7]),
        Some(vec![1.5, 1.0, 0.5]),
        Some(vec![2.6, 0.2, 0.2]),
    )
    .unwrap();
    assert_eq!(s.model, Model::Full);
    assert_eq!(s.x_spectrum.values(), &[2.6, 0.2, 0.2]);
}

#[test]
fn invalid_inputs_rejected() {
    assert!(build(
        2,
        2,
        1.0,
        0.0,
        Some("ind"),
        Some(vec![1.5, 0.5]),
        None,
        None
    )
    .is_err());
    assert!(build(2, 2, 1.0, 0.0, None, Some(vec![1.5, 1.5]), None, None).is_err());
    assert!(build(2, 2, 1.0, 0.0, Some("bogus"), None, None, None).is_err());
    assert!(build(2, 2, -1.0, 0.0, None, None, None, None).is_err());
}
