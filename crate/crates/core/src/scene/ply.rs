//! Binary little-endian splat PLY files.
//!
//! The vertex element carries, per Gaussian:
//!
//! | property                 | meaning                               | activation          |
//! |--------------------------|---------------------------------------|---------------------|
//! | `x`, `y`, `z`            | mean (meters)                         | none                |
//! | `scale_0..scale_2`       | log standard deviations               | `exp`               |
//! | `rot_0..rot_3`           | quaternion `(w, x, y, z)`             | normalize           |
//! | `opacity`                | pre-sigmoid opacity                   | `1 / (1 + e^-v)`    |
//! | `f_dc_0..f_dc_2`         | degree-0 spherical harmonic color     | `0.5 + C0 * v`      |
//!
//! Any other vertex property (normals, `f_rest_*`) is skipped. Elements after
//! `vertex` are ignored.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::real::Real;

use super::splat::Gaussian3D;

/// Zeroth-order spherical harmonic basis constant.
pub const SH_C0: f64 = 0.282_094_791_773_878_14;

const REQUIRED: [&str; 14] = [
    "x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
    "rot_3",
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => f64::from(b[0] as i8),
            Scalar::U8 => f64::from(b[0]),
            Scalar::I16 => f64::from(i16::from_le_bytes([b[0], b[1]])),
            Scalar::U16 => f64::from(u16::from_le_bytes([b[0], b[1]])),
            Scalar::I32 => f64::from(i32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::U32 => f64::from(u32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F32 => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F64 => f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]),
        }
    }
}

struct Layout {
    count: usize,
    stride: usize,
    /// Offset and type of each required property, in `REQUIRED` order.
    fields: Vec<(usize, Scalar)>,
}

fn parse_header<R: BufRead>(r: &mut R) -> Result<Layout> {
    let mut line = String::new();
    let next = |r: &mut R, line: &mut String| -> Result<bool> {
        line.clear();
        let n = r.read_line(line)?;
        Ok(n > 0)
    };
    if !next(r, &mut line)? || line.trim_end() != "ply" {
        return Err(Error::Parse("missing 'ply' magic".into()));
    }
    let mut format_ok = false;
    let mut count = None;
    let mut in_vertex = false;
    let mut seen_vertex = false;
    let mut props: Vec<(String, Scalar)> = Vec::new();
    loop {
        if !next(r, &mut line)? {
            return Err(Error::Parse("header ended before end_header".into()));
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["end_header"] => break,
            ["format", fmt, _] => {
                if *fmt != "binary_little_endian" {
                    return Err(Error::Parse(format!("unsupported format '{fmt}'")));
                }
                format_ok = true;
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, n] => {
                if seen_vertex {
                    in_vertex = false;
                    continue;
                }
                if *name != "vertex" {
                    return Err(Error::Parse(format!("element '{name}' precedes the vertex element")));
                }
                count = Some(n.parse::<usize>().map_err(|_| Error::Parse(format!("bad vertex count '{n}'")))?);
                in_vertex = true;
                seen_vertex = true;
            }
            ["property", "list", ..] => {
                if in_vertex {
                    return Err(Error::Parse("list properties are not supported on vertices".into()));
                }
            }
            ["property", ty, name] => {
                if in_vertex {
                    let s = Scalar::parse(ty).ok_or_else(|| Error::Parse(format!("unknown property type '{ty}'")))?;
                    props.push(((*name).to_string(), s));
                }
            }
            _ => return Err(Error::Parse(format!("malformed header line '{}'", line.trim_end()))),
        }
    }
    if !format_ok {
        return Err(Error::Parse("missing format line".into()));
    }
    let count = count.ok_or_else(|| Error::Parse("no vertex element".into()))?;
    let mut offsets = Vec::with_capacity(props.len());
    let mut stride = 0;
    for (_, s) in &props {
        offsets.push(stride);
        stride += s.size();
    }
    let fields = REQUIRED
        .iter()
        .map(|name| {
            props
                .iter()
                .position(|(n, _)| n == name)
                .map(|i| (offsets[i], props[i].1))
                .ok_or_else(|| Error::Parse(format!("missing vertex property '{name}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Layout { count, stride, fields })
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Reads a splat PLY, applying the activation conventions above.
pub fn read_splats<T: Real, R: Read>(reader: R) -> Result<Vec<Gaussian3D<T>>> {
    let mut r = BufReader::new(reader);
    let layout = parse_header(&mut r)?;
    let mut record = vec![0u8; layout.stride];
    let mut out = Vec::with_capacity(layout.count);
    for idx in 0..layout.count {
        r.read_exact(&mut record).map_err(|_| Error::BadRecord { record: idx, reason: "truncated record".into() })?;
        let mut raw = [0.0f64; 14];
        for (k, (off, ty)) in layout.fields.iter().enumerate() {
            raw[k] = ty.read(&record[*off..*off + ty.size()]);
            if !raw[k].is_finite() {
                return Err(Error::BadRecord { record: idx, reason: format!("non-finite '{}'", REQUIRED[k]) });
            }
        }
        let t = |v: f64| T::lit(v);
        let mean = Vec3::new(t(raw[0]), t(raw[1]), t(raw[2]));
        let color = [3, 4, 5].map(|k| t((0.5 + SH_C0 * raw[k]).clamp(0.0, 1.0)));
        let opacity = t(sigmoid(raw[6]));
        let scale = Vec3::new(t(raw[7].exp()), t(raw[8].exp()), t(raw[9].exp()));
        let rotation = [t(raw[10]), t(raw[11]), t(raw[12]), t(raw[13])];
        let g = Gaussian3D::new(mean, scale, rotation, opacity, color)
            .map_err(|e| Error::BadRecord { record: idx, reason: e.to_string() })?;
        out.push(g);
    }
    Ok(out)
}

pub fn load_splats<T: Real>(path: impl AsRef<Path>) -> Result<Vec<Gaussian3D<T>>> {
    let f = std::fs::File::open(path.as_ref())?;
    read_splats(f)
}

/// Writes splats with the inverse activations, as `float` properties
/// `x y z nx ny nz f_dc_0 f_dc_1 f_dc_2 opacity scale_0 scale_1 scale_2 rot_0 rot_1 rot_2 rot_3`.
pub fn write_splats<T: Real, W: Write>(mut w: W, splats: &[Gaussian3D<T>]) -> Result<()> {
    let names = [
        "x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1", "scale_2", "rot_0",
        "rot_1", "rot_2", "rot_3",
    ];
    let mut header = format!("ply\nformat binary_little_endian 1.0\nelement vertex {}\n", splats.len());
    for n in names {
        header.push_str(&format!("property float {n}\n"));
    }
    header.push_str("end_header\n");
    w.write_all(header.as_bytes())?;
    let mut buf = Vec::with_capacity(splats.len() * names.len() * 4);
    for g in splats {
        let op = g.opacity.to_f64_lossy().clamp(1e-7, 1.0 - 1e-7);
        let vals = [
            g.mean.x.to_f64_lossy(),
            g.mean.y.to_f64_lossy(),
            g.mean.z.to_f64_lossy(),
            0.0,
            0.0,
            0.0,
            (g.color[0].to_f64_lossy() - 0.5) / SH_C0,
            (g.color[1].to_f64_lossy() - 0.5) / SH_C0,
            (g.color[2].to_f64_lossy() - 0.5) / SH_C0,
            (op / (1.0 - op)).ln(),
            g.scale.x.to_f64_lossy().ln(),
            g.scale.y.to_f64_lossy().ln(),
            g.scale.z.to_f64_lossy().ln(),
            g.rotation[0].to_f64_lossy(),
            g.rotation[1].to_f64_lossy(),
            g.rotation[2].to_f64_lossy(),
            g.rotation[3].to_f64_lossy(),
        ];
        for v in vals {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn save_splats<T: Real>(path: impl AsRef<Path>, splats: &[Gaussian3D<T>]) -> Result<()> {
    let f = std::fs::File::create(path.as_ref())?;
    let mut w = std::io::BufWriter::new(f);
    write_splats(&mut w, splats)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(n: usize, props: &[&str]) -> Vec<u8> {
        let mut h = format!("ply\nformat binary_little_endian 1.0\ncomment test\nelement vertex {n}\n");
        for p in props {
            h.push_str(&format!("property float {p}\n"));
        }
        h.push_str("end_header\n");
        h.into_bytes()
    }

    fn record(vals: &[f32]) -> Vec<u8> {
        vals.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn empty_file_gives_empty_set() {
        let bytes = header(0, &REQUIRED);
        let gs: Vec<Gaussian3D<f64>> = read_splats(&bytes[..]).unwrap();
        assert!(gs.is_empty());
    }

    #[test]
    fn activations_applied_to_known_record() {
        // Property order deliberately differs from REQUIRED, with an extra f_rest field.
        let props = [
            "x", "y", "z", "f_rest_0", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3", "opacity", "f_dc_0",
            "f_dc_1", "f_dc_2",
        ];
        let mut bytes = header(1, &props);
        bytes.extend(record(&[1.0, 2.0, 0.5, 9.0, 0.0, -1.0, (0.5f32).ln(), 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0]));
        let gs: Vec<Gaussian3D<f64>> = read_splats(&bytes[..]).unwrap();
        let g = &gs[0];
        assert_eq!(g.mean, Vec3::new(1.0, 2.0, 0.5));
        assert!((g.scale.x - 1.0).abs() < 1e-12);
        assert!((g.scale.y - (-1.0f64).exp()).abs() < 1e-7);
        assert!((g.scale.z - 0.5).abs() < 1e-7);
        assert_eq!(g.rotation, [1.0, 0.0, 0.0, 0.0]);
        assert!((g.opacity - 0.5).abs() < 1e-12);
        assert!((g.color[0] - (0.5 + SH_C0)).abs() < 1e-7);
        assert!((g.color[1] - (0.5 - SH_C0)).abs() < 1e-7);
        assert!((g.color[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nan_mean_names_record() {
        let mut bytes = header(2, &REQUIRED);
        let good = [0.0f32, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, -1.0, -1.0, 1.0, 0.0, 0.0, 0.0];
        let mut bad = good;
        bad[1] = f32::NAN;
        bytes.extend(record(&good));
        bytes.extend(record(&bad));
        let err = read_splats::<f64, _>(&bytes[..]).unwrap_err();
        assert!(matches!(err, Error::BadRecord { record: 1, .. }), "{err}");
    }

    #[test]
    fn truncated_and_malformed() {
        let mut bytes = header(1, &REQUIRED);
        bytes.extend(record(&[0.0; 10]));
        assert!(matches!(read_splats::<f64, _>(&bytes[..]), Err(Error::BadRecord { record: 0, .. })));
        assert!(matches!(read_splats::<f64, _>(&b"plx\n"[..]), Err(Error::Parse(_))));
        let h = header(1, &REQUIRED[..5]);
        assert!(matches!(read_splats::<f64, _>(&h[..]), Err(Error::Parse(_))));
        let ascii = b"ply\nformat ascii 1.0\nelement vertex 0\nend_header\n";
        assert!(read_splats::<f64, _>(&ascii[..]).is_err());
    }

    #[test]
    fn write_read_round_trip() {
        let g = Gaussian3D::new(
            Vec3::new(1.5, -2.0, 0.25),
            Vec3::new(0.1, 0.02, 0.3),
            [0.9, 0.1, -0.3, 0.2],
            0.7,
            [0.2, 0.9, 0.4],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_splats(&mut buf, &[g, g]).unwrap();
        let back: Vec<Gaussian3D<f64>> = read_splats(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        let b = back[1];
        assert!((b.mean - g.mean).norm() < 1e-6);
        assert!((b.scale - g.scale).norm() < 1e-6);
        assert!((b.opacity - g.opacity).abs() < 1e-6);
        for k in 0..4 {
            assert!((b.rotation[k] - g.rotation[k]).abs() < 1e-6);
        }
        for k in 0..3 {
            assert!((b.color[k] - g.color[k]).abs() < 1e-6);
        }
    }
}
