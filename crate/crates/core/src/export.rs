//! CSV and JSON writers with fixed 17-significant-digit float formatting.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::continuation_scan::{Curve, FamilyTable, RegionRaster};
use crate::reduced_system::{Reconstruction, Trajectory};

pub const TRAJECTORY_HEADER: &str = "t,q,p,m1,m2,m3,H,C";
pub const RECONSTRUCTION_HEADER: &str = "t,x1,y1,z1,x2,y2,z2";
pub const RASTER_HEADER: &str = "kappa,q,label";

pub const FAMILY_TABLE_HEADER: &str =
    "kappa,q,p,m1,m2,m3,casimir,re1,im1,re2,im2,re3,im3,re4,im4,re5,im5,class";

/// Shortest fixed-width scientific form carrying 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // CSV readers understand these spellings
        format!("{x}")
    }
}

fn push_row(out: &mut String, cells: &[f64]) {
    for (i, x) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*x));
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    for s in traj.samples() {
        let st = s.state;
        push_row(&mut out, &[s.t, st.q, st.p, st.m1, st.m2, st.m3, s.h, s.c]);
        out.push('\n');
    }
    out
}

pub fn reconstruction_csv(rec: &Reconstruction) -> String {
    let mut out = format!("{RECONSTRUCTION_HEADER}\n");
    for ((t, a), b) in rec.times.iter().zip(&rec.x1).zip(&rec.x2) {
        push_row(&mut out, &[*t, a.x, a.y, a.z, b.x, b.y, b.z]);
        out.push('\n');
    }
    out
}

pub fn family_table_csv(table: &FamilyTable) -> String {
    let mut out = format!("{FAMILY_TABLE_HEADER}\n");
    for r in &table.rows {
        let s = r.state;
        let mut cells = vec![r.kappa, s.q, s.p, s.m1, s.m2, s.m3, r.casimir];
        for i in 0..5 {
            let e = r.eigenvalues.get(i);
            cells.push(e.map_or(f64::NAN, |e| e.re));
            cells.push(e.map_or(f64::NAN, |e| e.im));
        }
        push_row(&mut out, &cells);
        let _ = writeln!(out, ",{}", r.classification);
    }
    out
}

pub fn raster_csv(raster: &RegionRaster) -> String {
    let mut out = format!("{RASTER_HEADER}\n");
    for (k, q, l) in raster.cells() {
        push_row(&mut out, &[k, q]);
        let _ = writeln!(out, ",{}", l.as_str());
    }
    out
}

/// What the raster CSV cannot hold: grid metadata and the overlay curves.
#[derive(Debug, Clone, Serialize)]
pub struct RasterSidecar<'a> {
    pub potential: &'a str,
    pub mu: f64,
    pub kappa_range: [f64; 2],
    pub q_range: [f64; 2],
    pub resolution: [usize; 2],
    pub curves: &'a [Curve],
}

pub fn raster_sidecar(raster: &RegionRaster) -> RasterSidecar<'_> {
    let ends = |v: &[f64]| [v[0], v[v.len() - 1]];
    RasterSidecar {
        potential: &raster.potential,
        mu: raster.mu,
        kappa_range: ends(&raster.kappas),
        q_range: ends(&raster.qs),
        resolution: [raster.kappas.len(), raster.qs.len()],
        curves: &raster.curves,
    }
}

/// serde_json formatter that writes every float through [`fmt_f64`].
struct Fixed<F>(F);

impl<F: Formatter> Formatter for Fixed<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn to_json_with<T: Serialize + ?Sized, F: Formatter>(value: &T, f: F) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed(f));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Compact JSON. Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    to_json_with(&finite_only(value)?, CompactFormatter)
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    to_json_with(&finite_only(value)?, PrettyFormatter::new())
}

// Round-tripping through Value maps NaN and infinities to null first,
// matching serde_json's own convention.
fn finite_only<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<serde_json::Value> {
    serde_json::to_value(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation_scan::family_sweep;
    use crate::equilibria::Family;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        let x = std::f64::consts::PI / 7.0;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_floats_are_fixed_and_parse_back() {
        let v = serde_json::json!({"a": 0.1, "b": [1.0, f64::NAN], "n": 3});
        let s = to_json(&v).unwrap();
        assert_eq!(s, r#"{"a":1.0000000000000001e-1,"b":[1.0000000000000000e0,null],"n":3}"#);
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn family_csv_columns_match_header() {
        let t = family_sweep(Family::Attracting, 2.5, 0.5, (-0.1, 0.1), 3).unwrap();
        let csv = family_table_csv(&t);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, FAMILY_TABLE_HEADER);
        let eig: Vec<String> = (1..=5).map(|i| format!("re{i},im{i}")).collect();
        assert!(header.contains(&eig.join(",")));
        for l in lines {
            assert_eq!(l.split(',').count(), header.split(',').count());
            assert!(l.ends_with(",Elliptic"));
        }
    }
}
