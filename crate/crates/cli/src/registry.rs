//! Named map instances: the registry maps config names onto constructors.
//! New instances are added here in code; there is deliberately no
//! expression language.

use bottdeg_core::bott::ProperNonlinearMap;
use bottdeg_core::degree::HomotopyFamily;
use bottdeg_core::euclid::LinearMap;
use bottdeg_core::models;
use nalgebra::DMatrix;

use crate::config::FlatConfig;

/// A degree-ready named instance.
pub struct DegreeInstance {
    /// Registry name (with parameters folded in).
    pub label: String,
    /// The map.
    pub map: ProperNonlinearMap,
    /// Problem dimension.
    pub dim: usize,
}

/// Resolves `map` (+ parameters) into a square map instance for the degree
/// command.
pub fn degree_instance(cfg: &FlatConfig) -> Result<DegreeInstance, String> {
    let name = cfg.get("map").ok_or("missing 'map'")?;
    match name {
        "cubic2" => Ok(DegreeInstance {
            label: "cubic2".into(),
            map: models::cubic2(),
            dim: 2,
        }),
        "square2" => Ok(DegreeInstance {
            label: "square2".into(),
            map: models::square2(),
            dim: 2,
        }),
        "cyclic" => {
            let l = cfg
                .usize_value("l")?
                .ok_or("map 'cyclic' needs l (e.g. --l 4)")?;
            Ok(DegreeInstance {
                label: format!("cyclic{l}"),
                map: models::cyclic(l),
                dim: l,
            })
        }
        "identity" => {
            let l = cfg.usize_value("l")?.unwrap_or(2);
            Ok(DegreeInstance {
                label: format!("identity{l}"),
                map: ProperNonlinearMap::identity(l),
                dim: l,
            })
        }
        "linear" => {
            let diag = cfg
                .f64_list("diag")?
                .ok_or("map 'linear' needs diag (e.g. --diag 1,-1)")?;
            let dim = diag.len();
            Ok(DegreeInstance {
                label: format!("linear-diag{dim}"),
                map: ProperNonlinearMap::from_linear(LinearMap::diagonal(&diag)),
                dim,
            })
        }
        other => Err(format!("unknown map '{other}'")),
    }
}

/// Resolves the homotopy family for an instance: `involution` and
/// `straight-line` for the planar cubic, `shift` for the cyclic maps, and
/// the constant family for linear maps.
pub fn homotopy_instance(cfg: &FlatConfig) -> Result<(String, HomotopyFamily), String> {
    let name = cfg.get("map").ok_or("missing 'map'")?;
    let kind = cfg.get("homotopy").unwrap_or("auto");
    match (name, kind) {
        ("cubic2", "involution") | ("cubic2", "auto") => {
            Ok(("involution".into(), models::cubic2_involution_homotopy()))
        }
        ("cubic2", "straight-line") => Ok((
            "straight-line".into(),
            models::straight_line_homotopy(models::cubic2()),
        )),
        ("cyclic", "shift") | ("cyclic", "auto") => {
            let l = cfg
                .usize_value("l")?
                .ok_or("map 'cyclic' needs l (e.g. --l 4)")?;
            Ok(("shift".into(), models::cyclic_shift_homotopy(l)))
        }
        ("identity", _) => {
            let l = cfg.usize_value("l")?.unwrap_or(2);
            Ok((
                "constant".into(),
                HomotopyFamily::new(l, LinearMap::identity(l), |_, x| x.clone()),
            ))
        }
        ("linear", _) => {
            let diag = cfg
                .f64_list("diag")?
                .ok_or("map 'linear' needs diag (e.g. --diag 1,-1)")?;
            let l = LinearMap::diagonal(&diag);
            let lm = l.clone();
            Ok((
                "constant".into(),
                HomotopyFamily::new(diag.len(), l, move |_, x| lm.apply(x)),
            ))
        }
        (map, kind) => Err(format!("no homotopy family '{kind}' for map '{map}'")),
    }
}

/// Diagonal entries of a linear control instance (for the commutativity
/// experiments): either explicit `diag`, or the named families
/// `inverse-square` / `dilation` of length `l`.
pub fn diagonal_entries(cfg: &FlatConfig) -> Result<Vec<f64>, String> {
    if let Some(d) = cfg.f64_list("diag")? {
        return Ok(d);
    }
    let n = cfg.usize_value("l")?.unwrap_or(12);
    match cfg.get("map") {
        Some("inverse-square") => Ok((1..=n).map(|k| 1.0 + 1.0 / ((k * k) as f64)).collect()),
        Some("dilation") => Ok(vec![2.0; n]),
        other => Err(format!(
            "bott commutativity control needs --diag or map inverse-square/dilation, got {other:?}"
        )),
    }
}

/// Parses an explicit dense matrix (`rows;cols;row-major` or a plain
/// semicolon-separated row list).
pub fn parse_matrix(raw: &str) -> Result<DMatrix<f64>, String> {
    let rows: Vec<Vec<f64>> = raw
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("bad matrix '{raw}': {e}"))?;
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("bad matrix shape in '{raw}'"));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(nrows, ncols, &flat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_named_maps() {
        let cfg = FlatConfig::parse("map = cubic2").unwrap();
        let inst = degree_instance(&cfg).unwrap();
        assert_eq!(inst.dim, 2);

        let cfg = FlatConfig::parse("map = cyclic\nl = 4").unwrap();
        assert_eq!(degree_instance(&cfg).unwrap().dim, 4);

        let cfg = FlatConfig::parse("map = nonsense").unwrap();
        assert!(degree_instance(&cfg).is_err());
    }

    #[test]
    fn matrix_parser_accepts_rows() {
        let m = parse_matrix("1,0;0,-1").unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m[(1, 1)], -1.0);
        assert!(parse_matrix("1,0;0").is_err());
    }
}
