//! Refractive-index tables and circular-basis contraction of the χ⁽²⁾ tensor.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub material: String,
    pub wavelength_nm: f64,
    pub index: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// Tabulated refractive indices, grouped per material and sorted by wavelength.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MaterialTable {
    by_material: BTreeMap<String, Vec<IndexEntry>>,
}

impl MaterialTable {
    pub fn new(entries: impl IntoIterator<Item = IndexEntry>) -> Result<Self> {
        let mut by_material: BTreeMap<String, Vec<IndexEntry>> = BTreeMap::new();
        for e in entries {
            if !(e.wavelength_nm > 0.0) {
                return Err(Error::contract(format!(
                    "{}: wavelength must be positive, got {}",
                    e.material, e.wavelength_nm
                )));
            }
            if !(e.index > 1.0) {
                return Err(Error::contract(format!("{}: index must exceed 1, got {}", e.material, e.index)));
            }
            by_material.entry(e.material.clone()).or_default().push(e);
        }
        for (name, rows) in by_material.iter_mut() {
            rows.sort_by(|a, b| a.wavelength_nm.total_cmp(&b.wavelength_nm));
            if rows.windows(2).any(|w| w[0].wavelength_nm == w[1].wavelength_nm) {
                return Err(Error::contract(format!("{name}: duplicate wavelength in table")));
            }
        }
        Ok(Self { by_material })
    }

    /// Diamond and thin-film LiNbO₃ (ordinary index) at 736, 1347 and 1623 nm.
    pub fn builtin() -> Self {
        let rows = [
            ("diamond", 736.0, 2.41),
            ("diamond", 1347.0, 2.38),
            ("diamond", 1623.0, 2.38),
            ("LiNbO3", 736.0, 2.23),
            ("LiNbO3", 1347.0, 2.14),
            ("LiNbO3", 1623.0, 2.13),
        ];
        let entries = rows.iter().map(|&(m, w, n)| IndexEntry {
            material: m.to_string(),
            wavelength_nm: w,
            index: n,
            note: if m == "diamond" { "n_dia".into() } else { "n_o, z-cut".into() },
        });
        Self::new(entries).expect("builtin table is valid")
    }

    /// Parses `material, wavelength_nm, index[, note]` records, one per line.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.splitn(4, ',').map(str::trim).collect();
            if fields.len() < 3 {
                return Err(Error::MaterialTableParse {
                    line: i + 1,
                    reason: format!("expected at least 3 comma-separated fields, found {}", fields.len()),
                });
            }
            let number = |s: &str, what: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::MaterialTableParse { line: i + 1, reason: format!("{what} `{s}`: {e}") })
            };
            entries.push(IndexEntry {
                material: fields[0].to_string(),
                wavelength_nm: number(fields[1], "wavelength")?,
                index: number(fields[2], "index")?,
                note: fields.get(3).map(|s| s.to_string()).unwrap_or_default(),
            });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn materials(&self) -> impl Iterator<Item = &str> {
        self.by_material.keys().map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = &IndexEntry> {
        self.by_material.values().flatten()
    }

    /// Index at `wavelength_nm`, exact at tabulated points and linearly
    /// interpolated between neighbours. Extrapolation is an error.
    pub fn lookup_index(&self, material: &str, wavelength_nm: f64) -> Result<f64> {
        let rows = self.by_material.get(material).ok_or_else(|| Error::UnknownMaterial(material.to_string()))?;
        let first = &rows[0];
        let last = &rows[rows.len() - 1];
        if !(wavelength_nm >= first.wavelength_nm && wavelength_nm <= last.wavelength_nm) {
            return Err(Error::WavelengthOutOfRange {
                material: material.to_string(),
                wavelength_nm,
                min_nm: first.wavelength_nm,
                max_nm: last.wavelength_nm,
            });
        }
        if let Some(hit) = rows.iter().find(|r| r.wavelength_nm == wavelength_nm) {
            return Ok(hit.index);
        }
        let upper = rows.iter().position(|r| r.wavelength_nm > wavelength_nm).unwrap_or(rows.len() - 1);
        let (lo, hi) = (&rows[upper - 1], &rows[upper]);
        let t = (wavelength_nm - lo.wavelength_nm) / (hi.wavelength_nm - lo.wavelength_nm);
        Ok(lo.index + t * (hi.index - lo.index))
    }
}

/// Second-order tensor entries that survive the ρ̂-WGM / φ̂-pump contraction
/// in z-cut LiNbO₃, plus the scalar surrogate used for isotropic models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2Tensor {
    pub d22: f64,
    pub d31: f64,
    pub chi_iso: f64,
}

impl Chi2Tensor {
    pub fn new(d22: f64, d31: f64, chi_iso: f64) -> Result<Self> {
        if !(chi_iso > 0.0) {
            return Err(Error::contract(format!("chi_iso must be positive, got {chi_iso}")));
        }
        Ok(Self { d22, d31, chi_iso })
    }

    /// LiNbO₃ values in m/V: d22 = 2.1 pm/V, d31 = −4.3 pm/V, χ_iso = 45 pm/V.
    pub fn linbo3() -> Self {
        Self { d22: 2.1e-12, d31: -4.3e-12, chi_iso: 4.5e-11 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularCoefficients {
    pub d_r: Complex64,
    pub d_l: Complex64,
}

impl CircularCoefficients {
    /// `sqrt((|d_R|² + |d_L|²)/2)`, the RMS magnitude of the pair.
    pub fn rms(&self) -> f64 {
        (0.5 * (self.d_r.norm_sqr() + self.d_l.norm_sqr())).sqrt()
    }
}

/// `d_R = (d22 + i d31)/√2`, `d_L = (d22 − i d31)/√2`.
pub fn contract_tensor(t: &Chi2Tensor) -> CircularCoefficients {
    CircularCoefficients { d_r: Complex64::new(t.d22, t.d31) / SQRT_2, d_l: Complex64::new(t.d22, -t.d31) / SQRT_2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn builtin_tabulated_points() {
        let t = MaterialTable::builtin();
        assert_eq!(t.lookup_index("diamond", 736.0).unwrap(), 2.41);
        assert_eq!(t.lookup_index("LiNbO3", 1623.0).unwrap(), 2.13);
        assert_eq!(t.lookup_index("LiNbO3", 1347.0).unwrap(), 2.14);
    }

    #[test]
    fn interpolation_between_equal_endpoints() {
        let t = MaterialTable::builtin();
        let mid = 0.5 * (1347.0 + 1623.0);
        assert!((t.lookup_index("diamond", mid).unwrap() - 2.38).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_linear() {
        let t = MaterialTable::builtin();
        let w = 736.0 + 0.25 * (1347.0 - 736.0);
        let n = t.lookup_index("LiNbO3", w).unwrap();
        assert!((n - (2.23 - 0.25 * 0.09)).abs() < 1e-14);
    }

    #[test]
    fn out_of_range_names_span() {
        let t = MaterialTable::builtin();
        let err = t.lookup_index("diamond", 500.0).unwrap_err();
        match &err {
            Error::WavelengthOutOfRange { min_nm, max_nm, .. } => {
                assert_eq!((*min_nm, *max_nm), (736.0, 1623.0));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("[736, 1623]"));
        assert!(matches!(t.lookup_index("silicon", 800.0), Err(Error::UnknownMaterial(_))));
    }

    #[test]
    fn parse_text_table() {
        let text = "# material, wavelength_nm, index\nSiN, 700, 2.02, fit\n\nSiN, 1500, 1.99\n";
        let t = MaterialTable::parse(text).unwrap();
        assert_eq!(t.lookup_index("SiN", 700.0).unwrap(), 2.02);
        assert_eq!(t.entries().next().unwrap().note, "fit");
        assert!(matches!(MaterialTable::parse("SiN, 7x0, 2.0"), Err(Error::MaterialTableParse { line: 1, .. })));
        assert!(MaterialTable::parse("SiN, 700, 0.9").is_err());
        assert!(MaterialTable::parse("SiN, 700").is_err());
    }

    #[test]
    fn linbo3_contraction_magnitude() {
        let c = contract_tensor(&Chi2Tensor::linbo3());
        let expected = (2.1f64.powi(2) + 4.3f64.powi(2)).sqrt() / SQRT_2 * 1e-12;
        assert!((c.d_r.norm() - expected).abs() < 1e-27);
        assert!((c.d_l.norm() - expected).abs() < 1e-27);
        assert!((expected - 3.38e-12).abs() < 0.01e-12);
    }

    #[test]
    fn isotropic_and_pure_imaginary_limits() {
        let d = 3.0e-12;
        let c = contract_tensor(&Chi2Tensor { d22: d, d31: 0.0, chi_iso: 1.0 });
        assert_eq!(c.d_r, c.d_l);
        assert_eq!(c.d_r, Complex64::new(d / SQRT_2, 0.0));

        let c = contract_tensor(&Chi2Tensor { d22: 0.0, d31: d, chi_iso: 1.0 });
        assert_eq!(c.d_r, Complex64::new(0.0, d / SQRT_2));
        assert_eq!(c.d_l, Complex64::new(0.0, -d / SQRT_2));
    }

    #[test]
    fn chi_iso_must_be_positive() {
        assert!(Chi2Tensor::new(1.0, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn contraction_preserves_norm(d22 in -1e-10f64..1e-10, d31 in -1e-10f64..1e-10) {
            let c = contract_tensor(&Chi2Tensor { d22, d31, chi_iso: 1.0 });
            let lhs = c.d_r.norm_sqr() + c.d_l.norm_sqr();
            let rhs = d22 * d22 + d31 * d31;
            prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn interpolation_stays_in_bracket(w in 736.0f64..1623.0) {
            let t = MaterialTable::builtin();
            for m in ["diamond", "LiNbO3"] {
                let n = t.lookup_index(m, w).unwrap();
                let (lo, hi) = if w <= 1347.0 {
                    (t.lookup_index(m, 736.0).unwrap(), t.lookup_index(m, 1347.0).unwrap())
                } else {
                    (t.lookup_index(m, 1347.0).unwrap(), t.lookup_index(m, 1623.0).unwrap())
                };
                prop_assert!(n >= lo.min(hi) - 1e-15 && n <= lo.max(hi) + 1e-15);
            }
        }
    }
}
