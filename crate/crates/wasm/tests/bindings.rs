use nlsinflate_wasm::{datum_norms, evolve, phase_space};

#[test]
fn snapshot_keeps_mass_and_stays_close_to_the_limit() {
    let snap = evolve(1.0 / 64.0, 1, 1.0, 0.1, 512, 16.0).unwrap_or_else(|_| panic!("evolve failed"));
    let dx = 16.0 / 512.0;
    let m0 = (std::f64::consts::PI / 2.0).sqrt();
    let m: f64 = snap.nls().iter().sum::<f64>() * dx;
    assert!((m - m0).abs() < 1e-10);
    assert_eq!(snap.limit_time(), 0.1);
    let gap = snap.nls().iter().zip(snap.limit()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 0.05, "{gap}");
}

#[test]
fn chirped_packet_concentrates_on_its_line() {
    let ps = phase_space(1.0 / 32.0, 1.0, 512, 16.0).unwrap_or_else(|_| panic!("transform failed"));
    let v = ps.values();
    assert_eq!(v.len(), ps.nx() * ps.nxi());
    let peak = v.iter().cloned().fold(0.0, f64::max);
    let j = v.iter().position(|&w| w == peak).unwrap();
    let x = -ps.x_extent() + (j % ps.nx()) as f64 * 2.0 * ps.x_extent() / ps.nx() as f64;
    let xi = -ps.xi_extent() + (j / ps.nx()) as f64 * 2.0 * ps.xi_extent() / ps.nxi() as f64;
    assert!((xi - x).abs() < 0.2, "peak at ({x}, {xi})");
}

#[test]
fn datum_norms_follow_the_scaling_exponent() {
    let out = datum_norms(3, 3, 0.1, 1.0, 4).unwrap_or_else(|_| panic!("datum_norms failed"));
    let (norms, tail) = out.split_at(4);
    assert!((tail[0] + 0.9).abs() < 1e-12);
    for w in norms.windows(2) {
        let slope = (w[1] / w[0]).log2() / -1.0;
        assert!((slope - tail[0]).abs() < 1e-6, "{slope}");
    }
    assert!(tail[1] < tail[0]);
}
