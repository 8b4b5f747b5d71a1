use nlsinflate::io::{
    decode, decode_phase_space, encode_phase_space, encode_vector_field, field_table, read_field, write_field,
    write_json, Table,
};
use nlsinflate::wavepacket::{wp_transform, WavePacketConfig};
use nlsinflate::{Complex64, Field, Grid, VectorField};

#[test]
fn field_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 64, 8.0).unwrap();
    let f = Field::from_fn(g, |x| Complex64::from_polar((-x[0] * x[0]).exp(), x[0]));
    let path = dir.path().join("fields/u.nlsf");
    write_field(&path, &f).unwrap();
    assert!(!dir.path().join("fields/u.nlsf.partial").exists());
    let back = read_field(&path).unwrap();
    assert_eq!(back.grid(), f.grid());
    for (a, b) in back.values().iter().zip(f.values()) {
        assert!((a - b).norm() < 1e-7);
    }
}

#[test]
fn vector_field_keeps_components() {
    let g = Grid::new(2, 8, 2.0).unwrap();
    let v = VectorField::new(g, vec![vec![1.0; 64], (0..64).map(f64::from).collect()]).unwrap();
    let (g2, blocks) = decode(&encode_vector_field(&v)).unwrap();
    assert_eq!(g2, g);
    assert_eq!(blocks.len(), 2);
    assert_eq!(blocks[1][63], Complex64::new(63.0, 0.0));
}

#[test]
fn phase_space_round_trip() {
    let g = Grid::new(1, 512, 16.0).unwrap();
    let u = Field::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
    let cfg = WavePacketConfig::auto(&u, 0.1, 0.0).unwrap();
    let w = wp_transform(&u, &cfg).unwrap();
    let back = decode_phase_space(&encode_phase_space(&w)).unwrap();
    assert_eq!(back.x_grid, w.x_grid);
    assert_eq!(back.xi_grid, w.xi_grid);
    assert_eq!(back.values.len(), w.values.len());
}

#[test]
fn csv_and_json_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = Table::new(["eps", "h"]);
    t.push(vec![0.0625, 1.5e-3]).unwrap();
    t.write(&dir.path().join("report.csv")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(text, "eps,h\n0.0625,0.0015\n");

    write_json(&dir.path().join("summary.json"), &serde_json::json!({"slope": 2.0})).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["slope"], 2.0);

    let g = Grid::new(1, 4, 4.0).unwrap();
    let table = field_table(&Field::from_fn(g, |x| Complex64::new(x[0], 0.0))).unwrap();
    assert_eq!(table.rows.len(), 4);
    assert!(field_table(&Field::zeros(Grid::new(2, 4, 4.0).unwrap())).is_err());
}
