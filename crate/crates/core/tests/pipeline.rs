use lagmin_core::biharmonic::parse_field;
use lagmin_core::mesh::{build_mesh, Grid};
use lagmin_core::pencils::{gauss_pencil_of_cones, PencilTag};
use lagmin_core::reconstruct::{isotropic_image, reconstruct_surface};
use lagmin_core::surfaces::{cyclographic_preimage, parse_surface};
use lagmin_core::verify::{biharmonic_report, curvature_report, field_of_surface, gaussmap_identity_residual};

#[test]
fn convolution_from_text_to_mesh() {
    let s = parse_surface::<f64>("conv(1*r1, 0.5*r4, -0.3*r7@theta=0.4)").unwrap();
    assert!(gaussmap_identity_residual(&s, Grid::square(40, 2.0)).pass);
    assert!(curvature_report(&s, 5, 10).unwrap().pass);
    let f = field_of_surface(&s).unwrap();
    assert!(biharmonic_report(&f, 5, 200, 2.0).unwrap().pass);
    let mesh = build_mesh(&s, Grid::square(30, 2.0));
    let obj = mesh.to_obj();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 900);
    assert!(!obj.contains("NaN") && !obj.contains("inf"));
}

#[test]
fn parsed_field_round_trips_through_isotropic_space() {
    let f = parse_field::<f64>("sum(0.5*elliptic(a1=1,a3=-1,b2=0.3), 2*poly(x^2*y - x))").unwrap();
    let s = reconstruct_surface(&f);
    for &(x, y) in &[(0.7, 1.3), (-1.1, 0.4), (1.5, -1.6)] {
        let (qx, qy, qz) = isotropic_image(&s, x, y).unwrap().as_finite().unwrap();
        assert!((qx - x).abs() < 1e-12 && (qy - y).abs() < 1e-12);
        assert!((qz - f.value(x, y).unwrap()).abs() < 1e-11);
    }
}

#[test]
fn cone_families_give_matching_pencils() {
    let phis = [-0.6, -0.1, 0.35, 0.8, 1.2];
    for (name, tag) in [
        ("R1", PencilTag::Elliptic),
        ("R4", PencilTag::Hyperbolic),
        ("R5", PencilTag::Hyperbolic),
        ("R7", PencilTag::Parabolic),
        ("R9", PencilTag::Parabolic),
    ] {
        let fam = cyclographic_preimage::<f64>(name).unwrap();
        let p = gauss_pencil_of_cones(|phi| fam.line(phi).unwrap(), &phis).unwrap();
        assert_eq!(p.tag, tag, "{name}");
    }
}
