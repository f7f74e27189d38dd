use solsurf_core::geometry::{embed_su2, export_json, export_obj, first_fundamental_form};
use solsurf_core::grid::{Chart, Grid2};
use solsurf_core::immersion::{conformal_immersion_closed, sym_tafel};
use solsurf_core::io::read_field;
use solsurf_core::sigma::{build_ladder, traveling_solution, veronese_field};
use solsurf_core::spectral::{SpectralParam, WaveBuilder};
use solsurf_core::symmetry::ConformalSpec;
use solsurf_core::C64;

fn interior(n: usize, margin: usize) -> impl Iterator<Item = (usize, usize)> {
    (margin..n - margin).flat_map(move |i| (margin..n - margin).map(move |j| (i, j)))
}

#[test]
fn traveling_conformal_immersion_is_degenerate() {
    let n = 41;
    let g = Grid2::centered(Chart::MinkowskiLightcone, [0.1, 0.2], 0.01, n).unwrap();
    let (_, j) = traveling_solution(2.0, 1.0, g).unwrap();
    let lam = C64::new(0.5, 0.0);
    let w = WaveBuilder::Traveling { kappa: 2.0, jets: j.clone() }.build(lam).unwrap();
    let calf = conformal_immersion_closed(&ConformalSpec::real(&[0.0, 1.0], &[0.0, 1.0]), &j, &w, lam).unwrap();
    let m = first_fundamental_form(&calf).unwrap();
    let mut checked = 0;
    for (i1, i2) in interior(n, m.margin) {
        let [e, f, gg] = m.data[g.node(i1, i2)];
        // tangents are nonzero but parallel: Cauchy–Schwarz is an equality
        assert!(e > 0.1 && gg > 0.1);
        assert!((e * gg - f * f).abs() < 1e-12 * e * gg, "det g = {} at ({i1},{i2})", e * gg - f * f);
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn sym_tafel_surface_exports() {
    let n = 21;
    let g = Grid2::centered(Chart::EuclideanComplex, [0.2, 0.1], 0.05, n).unwrap();
    let ladder = build_ladder(&veronese_field(2, g).unwrap()).unwrap();
    let b = WaveBuilder::Euclidean { ladder };
    let f = sym_tafel(&b, C64::new(1.0, 0.0), SpectralParam::real(0.3).unwrap()).unwrap();

    let m = first_fundamental_form(&f).unwrap();
    for (i1, i2) in interior(n, m.margin) {
        let [e, ff, gg] = m.data[g.node(i1, i2)];
        assert!(e * gg - ff * ff > 0.0);
    }

    let dir = tempfile::tempdir().unwrap();
    let s = embed_su2(&f).unwrap();
    let obj = dir.path().join("s.obj");
    export_obj(&s, &obj).unwrap();
    let text = std::fs::read_to_string(&obj).unwrap();
    let (pts, dims) = s.valid_block();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), pts.len());
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * (dims[0] - 1) * (dims[1] - 1));

    let js = dir.path().join("f.json");
    export_json(&f, &js).unwrap();
    let back = read_field(&js).unwrap();
    assert_eq!(back.values().raw(), f.values().raw());
}
