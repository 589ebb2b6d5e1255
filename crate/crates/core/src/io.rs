//! JSON family files.
//!
//! Set families: `{"n": 6, "sets": [[1,2],[2,3]]}`.
//! Permutation families: `{"n": 4, "perms": [[2,1,3,4], …]}`.
//! Output is compact, keys in fixed order, sets sorted, newline-terminated,
//! so identical families always serialize to identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::family::{GroundSet, SetFamily};
use crate::mask::SubsetMask;
use crate::perm::{PermRepr, Permutation, PermutationFamily};

#[derive(Serialize, Deserialize)]
struct SetRepr {
    n: usize,
    sets: Vec<Vec<usize>>,
}

/// What a family file contained.
#[derive(Clone, Debug)]
pub enum LoadedFamily {
    Sets(SetFamily),
    Perms(PermutationFamily),
}

impl LoadedFamily {
    /// The set family, with permutations in grid encoding.
    pub fn into_set_family(self) -> Result<SetFamily> {
        match self {
            LoadedFamily::Sets(f) => Ok(f),
            LoadedFamily::Perms(p) => p.to_set_family(),
        }
    }
}

pub fn family_to_json(f: &SetFamily) -> String {
    let repr = SetRepr {
        n: f.n(),
        sets: f.members().iter().map(SubsetMask::to_one_based).collect(),
    };
    let mut s = serde_json::to_string(&repr).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn perms_to_json(f: &PermutationFamily) -> String {
    let mut s = serde_json::to_string(&PermRepr::from(f)).expect("plain data serializes");
    s.push('\n');
    s
}

fn parse_err(path: &Path, e: serde_json::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    }
}

fn field_err(path: &Path, field: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Field {
        path: path.to_path_buf(),
        field: field.into(),
        msg: msg.into(),
    }
}

/// Parses family JSON; `origin` is only used in error messages.
pub fn parse_family(text: &str, origin: &Path) -> Result<LoadedFamily> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_err(origin, e))?;
    let obj = value
        .as_object()
        .ok_or_else(|| field_err(origin, "<root>", "expected a JSON object"))?;
    let n = obj
        .get("n")
        .ok_or_else(|| field_err(origin, "n", "missing"))?
        .as_u64()
        .filter(|&n| n >= 1)
        .ok_or_else(|| field_err(origin, "n", "expected a positive integer"))? as usize;

    let rows = |key: &str| -> Result<Vec<Vec<usize>>> {
        let arr = obj[key]
            .as_array()
            .ok_or_else(|| field_err(origin, key, "expected an array of arrays"))?;
        arr.iter()
            .enumerate()
            .map(|(i, row)| {
                let row = row
                    .as_array()
                    .ok_or_else(|| field_err(origin, format!("{key}[{i}]"), "expected an array"))?;
                row.iter()
                    .enumerate()
                    .map(|(j, x)| {
                        x.as_u64()
                            .map(|x| x as usize)
                            .filter(|&x| (1..=n).contains(&x))
                            .ok_or_else(|| {
                                field_err(
                                    origin,
                                    format!("{key}[{i}][{j}]"),
                                    format!("expected an integer in 1..={n}, found {x}"),
                                )
                            })
                    })
                    .collect()
            })
            .collect()
    };

    match (obj.contains_key("sets"), obj.contains_key("perms")) {
        (true, false) => {
            let ground = GroundSet::new(n)?;
            let masks = rows("sets")?
                .iter()
                .map(|r| SubsetMask::from_elems(r.iter().map(|x| x - 1)))
                .collect::<Vec<_>>();
            Ok(LoadedFamily::Sets(SetFamily::new(ground, masks)?))
        }
        (false, true) => {
            let perms = rows("perms")?
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    if r.len() != n {
                        return Err(field_err(origin, format!("perms[{i}]"), format!("expected {n} images")));
                    }
                    Permutation::from_one_line(r)
                        .map_err(|e| field_err(origin, format!("perms[{i}]"), e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LoadedFamily::Perms(PermutationFamily::new(n, perms)?))
        }
        _ => Err(field_err(origin, "<root>", "expected exactly one of `sets` or `perms`")),
    }
}

pub fn load_family(path: &Path) -> Result<LoadedFamily> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_family(&text, path)
}

/// Loads a file as a set family, grid-encoding permutation files.
pub fn load_set_family(path: &Path) -> Result<SetFamily> {
    load_family(path)?.into_set_family()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_canonical_bytes() {
        let f = SetFamily::from_one_based(6, &[vec![2, 3], vec![1, 2]]).unwrap();
        assert_eq!(family_to_json(&f), "{\"n\":6,\"sets\":[[1,2],[2,3]]}\n");
        let p = PermutationFamily::symmetric_group(2);
        assert_eq!(perms_to_json(&p), "{\"n\":2,\"perms\":[[1,2],[2,1]]}\n");
    }

    #[test]
    fn reports_field_context() {
        let origin = Path::new("f.json");
        let err = parse_family(r#"{"n": 3, "sets": [[1,2],[2,7]]}"#, origin).unwrap_err();
        assert!(err.to_string().contains("sets[1][1]"), "{err}");
        let err = parse_family("{\"n\": 3,\n \"sets\": [[1,2],}", origin).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_family(r#"{"n": 3, "perms": [[1,2]]}"#, origin).unwrap_err();
        assert!(err.to_string().contains("perms[0]"), "{err}");
        assert!(parse_family(r#"{"n": 0, "sets": []}"#, origin).is_err());
    }

    #[test]
    fn perm_file_loads_as_grid() {
        let text = r#"{"n":3,"perms":[[1,2,3],[2,3,1]]}"#;
        let f = parse_family(text, Path::new("p.json")).unwrap().into_set_family().unwrap();
        assert_eq!(f.n(), 9);
        assert_eq!(f.len(), 2);
    }

    proptest! {
        #[test]
        fn serialize_parse_serialize_is_stable(sets in proptest::collection::vec(
            proptest::collection::btree_set(1usize..=10, 0..6), 0..12)) {
            let rows: Vec<Vec<usize>> = sets.iter().map(|s| s.iter().copied().collect()).collect();
            let f = SetFamily::from_one_based(10, &rows).unwrap();
            let text = family_to_json(&f);
            let g = parse_family(&text, Path::new("x")).unwrap().into_set_family().unwrap();
            prop_assert_eq!(&g, &f);
            prop_assert_eq!(family_to_json(&g), text);
        }
    }
}
