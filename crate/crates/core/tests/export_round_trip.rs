use proptest::prelude::*;

use cclab_core::convexity::{build_fowler_instance, descending_t0, scan_balls, ScanReport};
use cclab_core::export::fmt_f64;
use cclab_core::fowler::{equilibrium_v0, hamiltonian, integrate, FowlerParams, PhasePoint};
use cclab_core::Dimension;

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

fn parse_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn trajectory_csv_reads_back_exactly() {
    let params = FowlerParams::from_fraction(dim(5), 0.45, 0.0).unwrap();
    let traj = integrate(&params, 0.0, 3.0, 1e-2).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let (header, rows) = parse_rows(&buf);
    assert_eq!(header, ["t", "v", "w", "H"]);
    assert_eq!(rows.len(), traj.samples().len());
    for (row, s) in rows.iter().zip(traj.samples()) {
        assert_eq!((row[0], row[1], row[2]), (s.t, s.v, s.w));
        assert_eq!(row[3], hamiltonian(PhasePoint::new(s.v, s.w), dim(5)));
    }
}

#[test]
fn scan_report_survives_json_and_csv() {
    let nd = dim(3);
    let eps = 0.3 * equilibrium_v0(nd);
    let inst = build_fowler_instance(nd, eps, descending_t0(nd, eps, 0.5).unwrap()).unwrap();
    let report = scan_balls(&inst, 12, 16, 8).unwrap();

    let text = serde_json::to_string(&report).unwrap();
    let back: ScanReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);

    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let (header, rows) = parse_rows(&buf);
    assert_eq!(
        header,
        ["index", "c1", "c2", "c3", "radius", "min_h", "a1", "a2", "a3"]
    );
    for (i, (row, b)) in rows.iter().zip(&report.balls).enumerate() {
        assert_eq!(row[0], i as f64);
        assert_eq!(&row[1..4], &b.center[..]);
        assert_eq!((row[4], row[5]), (b.radius, b.min_h));
        assert_eq!(&row[6..9], &b.argmin[..]);
    }
}

proptest! {
    #[test]
    fn formatted_floats_parse_to_the_same_bits(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn json_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<f64>(&text).unwrap(), x);
    }
}
