use std::f64::consts::PI;

use warpgeom::spheregrid::{
    read_field, write_circle_field, write_sphere_field, AnyField, CircleField, CircleGrid, PolarGrid, ScalarField,
};
use warpgeom::Error;

#[test]
fn sphere_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let g = PolarGrid::new(12, 16).unwrap();
    let f = ScalarField::from_fn(&g, |r, t| 2.0 + r.cos() + 0.1 * (3.0 * t).sin() + 1e-17);
    write_sphere_field(&path, &f).unwrap();
    let AnyField::Sphere(back) = read_field(&path).unwrap() else { panic!("expected a sphere field") };
    assert_eq!(back.grid().n_r(), 12);
    assert_eq!(back.grid().n_theta(), 16);
    assert_eq!(back.values(), f.values());
}

#[test]
fn circle_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let g = CircleGrid::new(33).unwrap();
    let h = CircleField::from_fn(&g, |p| 1.0 + 0.3 * p.cos() + PI * 1e-9);
    write_circle_field(&path, &h).unwrap();
    let AnyField::Circle(back) = read_field(&path).unwrap() else { panic!("expected a circle field") };
    assert_eq!(back.grid().len(), 33);
    assert_eq!(back.values(), h.values());
}

#[test]
fn row_major_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    std::fs::write(&path, r#"{"grid": {"n_r": 4, "n_theta": 4}, "values": [0,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15]}"#)
        .unwrap();
    let AnyField::Sphere(f) = read_field(&path).unwrap() else { panic!("expected a sphere field") };
    assert_eq!(f.at(1, 2), 6.0);
    assert_eq!(f.at(3, 0), 12.0);
}

#[test]
fn malformed_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("short.json", r#"{"grid": {"n_r": 4, "n_theta": 4}, "values": [1, 2, 3]}"#),
        ("nan.json", r#"{"grid": {"n_phi": 4}, "values": [1, 2, null, 4]}"#),
        ("coarse.json", r#"{"grid": {"n_r": 2, "n_theta": 2}, "values": [1, 1, 1, 1]}"#),
        ("garbage.json", "not json"),
        ("nogrid.json", r#"{"values": [1, 2]}"#),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        assert!(read_field(&path).is_err(), "{name} was accepted");
    }
    assert!(matches!(read_field(dir.path().join("missing.json")), Err(Error::Io(_))));
}
