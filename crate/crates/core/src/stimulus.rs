//! Attribute space and stimulus assets.
//!
//! The builtin catalog uses procedurally drawn glyphs: one silhouette per
//! category, a colour and texture per identity, and a geometric variant per
//! view angle. External catalogs are read from a `catalog.json` manifest that
//! lists one PNG per `(category, identity, view_angle)` triple.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{Attribute, AttributeMap, IdentityValue, Location, Value};

pub const DEFAULT_CATEGORIES: [&str; 8] = [
    "benches", "boats", "cars", "chairs", "couches", "lighting", "planes", "tables",
];
pub const DEFAULT_IDENTITIES_PER_CATEGORY: u32 = 8;
pub const DEFAULT_VIEW_ANGLES: u32 = 4;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog manifest not found at {0}")]
    MissingManifest(PathBuf),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed catalog manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("asset for ({category}, {identity}, {view_angle}) references missing image {file}")]
    MissingImage {
        category: String,
        identity: u32,
        view_angle: u32,
        file: PathBuf,
    },
    #[error("catalog is incomplete: no asset for ({category}, {identity}, {view_angle})")]
    Incomplete {
        category: String,
        identity: u32,
        view_angle: u32,
    },
    #[error("asset ({category}, {identity}, {view_angle}) is outside the attribute space")]
    OutsideSpace {
        category: String,
        identity: u32,
        view_angle: u32,
    },
    #[error("asset ({category}, {identity}, {view_angle}) is listed twice")]
    DuplicateAsset {
        category: String,
        identity: u32,
        view_angle: u32,
    },
    #[error("duplicate {list} name {name:?}")]
    DuplicateName { list: &'static str, name: String },
    #[error("invalid {list} name {name:?}: names must be non-empty and lowercase")]
    InvalidName { list: &'static str, name: String },
    #[error("invalid attribute space: {0}")]
    InvalidSpace(String),
    #[error("unsatisfiable stimulus constraint: {0}")]
    Unsatisfiable(String),
}

/// The attribute values stimuli can take.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpace {
    pub categories: Vec<String>,
    pub identities_per_category: u32,
    pub view_angles: Vec<u32>,
    pub locations: Vec<Location>,
}

impl Default for AttributeSpace {
    fn default() -> Self {
        AttributeSpace {
            categories: DEFAULT_CATEGORIES.iter().map(|s| s.to_string()).collect(),
            identities_per_category: DEFAULT_IDENTITIES_PER_CATEGORY,
            view_angles: (0..DEFAULT_VIEW_ANGLES).collect(),
            locations: Location::ALL.to_vec(),
        }
    }
}

impl AttributeSpace {
    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.categories.is_empty() {
            return Err(CatalogError::InvalidSpace("no categories".into()));
        }
        let mut seen = BTreeSet::new();
        for name in &self.categories {
            if name.is_empty() || name.trim() != name || name.to_lowercase() != *name {
                return Err(CatalogError::InvalidName {
                    list: "category",
                    name: name.clone(),
                });
            }
            if !seen.insert(name) {
                return Err(CatalogError::DuplicateName {
                    list: "category",
                    name: name.clone(),
                });
            }
        }
        if self.identities_per_category == 0 {
            return Err(CatalogError::InvalidSpace(
                "identities_per_category must be positive".into(),
            ));
        }
        let angles: BTreeSet<_> = self.view_angles.iter().collect();
        if angles.len() != self.view_angles.len() {
            return Err(CatalogError::InvalidSpace("duplicate view angle".into()));
        }
        if self.view_angles.len() < 2 {
            return Err(CatalogError::InvalidSpace(
                "every identity needs at least 2 view angles".into(),
            ));
        }
        let locations: BTreeSet<_> = self.locations.iter().collect();
        if self.locations.len() != 4 || locations.len() != 4 {
            return Err(CatalogError::InvalidSpace(
                "exactly four distinct locations are required".into(),
            ));
        }
        Ok(())
    }

    pub fn has_category(&self, name: &str) -> bool {
        self.categories.iter().any(|c| c == name)
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == name)
    }

    /// Every value `attribute` can take, in canonical order.
    pub fn pool(&self, attribute: Attribute) -> Vec<Value> {
        match attribute {
            Attribute::Category => self.categories.iter().cloned().map(Value::Category).collect(),
            Attribute::Identity => self
                .categories
                .iter()
                .flat_map(|c| {
                    (0..self.identities_per_category).map(move |index| {
                        Value::Identity(IdentityValue {
                            category: c.clone(),
                            index,
                        })
                    })
                })
                .collect(),
            Attribute::ViewAngle => self.view_angles.iter().copied().map(Value::ViewAngle).collect(),
            Attribute::Location => self.locations.iter().copied().map(Value::Location).collect(),
        }
    }

    /// Whether `value` belongs to this space.
    pub fn contains(&self, value: &Value) -> bool {
        match value {
            Value::Bool(_) => true,
            Value::Category(c) => self.has_category(c),
            Value::Identity(id) => self.has_category(&id.category) && id.index < self.identities_per_category,
            Value::ViewAngle(a) => self.view_angles.contains(a),
            Value::Location(l) => self.locations.contains(l),
        }
    }
}

/// A renderable stimulus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub category: String,
    pub identity: u32,
    pub view_angle: u32,
}

impl StimulusSpec {
    pub fn key(&self) -> AssetKey {
        (self.category.clone(), self.identity, self.view_angle)
    }

    pub fn value(&self, attribute: Attribute) -> Option<Value> {
        match attribute {
            Attribute::Category => Some(Value::Category(self.category.clone())),
            Attribute::Identity => Some(Value::Identity(IdentityValue {
                category: self.category.clone(),
                index: self.identity,
            })),
            Attribute::ViewAngle => Some(Value::ViewAngle(self.view_angle)),
            Attribute::Location => None,
        }
    }
}

pub type AssetKey = (String, u32, u32);

/// Parameters of a builtin procedural glyph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Glyph {
    pub category: usize,
    pub identity: u32,
    pub view_angle: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetRef {
    Glyph(Glyph),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogSource {
    Builtin,
    External(PathBuf),
}

/// A complete, immutable mapping from attribute triples to assets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    space: AttributeSpace,
    assets: BTreeMap<AssetKey, AssetRef>,
    source: CatalogSource,
}

/// `catalog.json` layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogManifest {
    pub categories: Vec<String>,
    pub identities_per_category: u32,
    pub view_angles: Vec<u32>,
    pub assets: Vec<ManifestAsset>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestAsset {
    pub category: String,
    pub identity: u32,
    pub view_angle: u32,
    pub file: PathBuf,
}

/// The default 8 categories x 8 identities x 4 view angles glyph catalog.
pub fn builtin_catalog() -> Catalog {
    let space = AttributeSpace::default();
    let mut assets = BTreeMap::new();
    for (ci, category) in space.categories.iter().enumerate() {
        for identity in 0..space.identities_per_category {
            for &view_angle in &space.view_angles {
                assets.insert(
                    (category.clone(), identity, view_angle),
                    AssetRef::Glyph(Glyph {
                        category: ci,
                        identity,
                        view_angle,
                    }),
                );
            }
        }
    }
    Catalog {
        space,
        assets,
        source: CatalogSource::Builtin,
    }
}

/// Loads an external catalog. `path` may be the manifest itself or the
/// directory containing `catalog.json`; image paths resolve relative to it.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let manifest_path = if path.is_dir() {
        path.join("catalog.json")
    } else {
        path.to_path_buf()
    };
    if !manifest_path.is_file() {
        return Err(CatalogError::MissingManifest(manifest_path));
    }
    let root = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = fs::read_to_string(&manifest_path).map_err(|source| CatalogError::Io {
        path: manifest_path.clone(),
        source,
    })?;
    let manifest: CatalogManifest = serde_json::from_str(&text)?;
    Catalog::from_manifest(manifest, &root)
}

impl Catalog {
    pub fn from_manifest(manifest: CatalogManifest, root: &Path) -> Result<Catalog, CatalogError> {
        let space = AttributeSpace {
            categories: manifest.categories,
            identities_per_category: manifest.identities_per_category,
            view_angles: manifest.view_angles,
            locations: Location::ALL.to_vec(),
        };
        space.validate()?;
        let mut assets = BTreeMap::new();
        for asset in manifest.assets {
            if !space.has_category(&asset.category)
                || asset.identity >= space.identities_per_category
                || !space.view_angles.contains(&asset.view_angle)
            {
                return Err(CatalogError::OutsideSpace {
                    category: asset.category,
                    identity: asset.identity,
                    view_angle: asset.view_angle,
                });
            }
            let file = root.join(&asset.file);
            if !file.is_file() {
                return Err(CatalogError::MissingImage {
                    category: asset.category,
                    identity: asset.identity,
                    view_angle: asset.view_angle,
                    file,
                });
            }
            let key = (asset.category, asset.identity, asset.view_angle);
            if assets.insert(key.clone(), AssetRef::File(file)).is_some() {
                return Err(CatalogError::DuplicateAsset {
                    category: key.0,
                    identity: key.1,
                    view_angle: key.2,
                });
            }
        }
        let catalog = Catalog {
            space,
            assets,
            source: CatalogSource::External(root.to_path_buf()),
        };
        catalog.check_complete()?;
        Ok(catalog)
    }

    fn check_complete(&self) -> Result<(), CatalogError> {
        for category in &self.space.categories {
            for identity in 0..self.space.identities_per_category {
                for &view_angle in &self.space.view_angles {
                    if !self.assets.contains_key(&(category.clone(), identity, view_angle)) {
                        return Err(CatalogError::Incomplete {
                            category: category.clone(),
                            identity,
                            view_angle,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &AttributeSpace {
        &self.space
    }

    pub fn source(&self) -> &CatalogSource {
        &self.source
    }

    pub fn asset(&self, spec: &StimulusSpec) -> Option<&AssetRef> {
        self.assets.get(&spec.key())
    }

    pub fn assets(&self) -> impl Iterator<Item = (&AssetKey, &AssetRef)> {
        self.assets.iter()
    }

    /// Draws a stimulus satisfying the category/identity/view-angle parts of
    /// `constraints`; free attributes are uniform over the space.
    pub fn sample_stimulus<R: Rng + ?Sized>(
        &self,
        constraints: &AttributeMap,
        rng: &mut R,
    ) -> Result<StimulusSpec, CatalogError> {
        let category = match &constraints.category {
            Some(c) if self.space.has_category(c) => c.clone(),
            Some(c) => return Err(CatalogError::Unsatisfiable(format!("unknown category {c:?}"))),
            None => self
                .space
                .categories
                .choose(rng)
                .cloned()
                .ok_or_else(|| CatalogError::Unsatisfiable("empty category list".into()))?,
        };
        let identity = match constraints.identity {
            Some(i) if i < self.space.identities_per_category => i,
            Some(i) => return Err(CatalogError::Unsatisfiable(format!("identity {i} out of range"))),
            None => rng.random_range(0..self.space.identities_per_category),
        };
        let view_angle = match constraints.view_angle {
            Some(a) if self.space.view_angles.contains(&a) => a,
            Some(a) => return Err(CatalogError::Unsatisfiable(format!("unknown view angle {a}"))),
            None => *self
                .space
                .view_angles
                .choose(rng)
                .ok_or_else(|| CatalogError::Unsatisfiable("empty view angle list".into()))?,
        };
        Ok(StimulusSpec {
            category,
            identity,
            view_angle,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_has_default_space() {
        let catalog = builtin_catalog();
        assert_eq!(catalog.space().categories.len(), 8);
        assert_eq!(catalog.space().identities_per_category, 8);
        assert!(catalog.space().view_angles.len() >= 4);
        assert_eq!(catalog.assets().count(), 8 * 8 * 4);
        assert_eq!(catalog, builtin_catalog());
        catalog.space().validate().unwrap();
    }

    #[test]
    fn fully_constrained_sample_is_exact() {
        let catalog = builtin_catalog();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let constraints = AttributeMap {
            category: Some("tables".into()),
            identity: Some(5),
            view_angle: Some(2),
            location: None,
        };
        let spec = catalog.sample_stimulus(&constraints, &mut rng).unwrap();
        assert_eq!(
            spec,
            StimulusSpec {
                category: "tables".into(),
                identity: 5,
                view_angle: 2
            }
        );
    }

    #[test]
    fn unknown_category_is_unsatisfiable() {
        let catalog = builtin_catalog();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let constraints = AttributeMap {
            category: Some("desks".into()),
            ..Default::default()
        };
        assert!(matches!(
            catalog.sample_stimulus(&constraints, &mut rng),
            Err(CatalogError::Unsatisfiable(_))
        ));
    }

    #[test]
    fn identity_frequencies_are_uniform() {
        // Brute-force frequency count against the 1/8 expectation.
        let catalog = builtin_catalog();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let constraints = AttributeMap {
            category: Some("cars".into()),
            ..Default::default()
        };
        let mut counts = [0usize; 8];
        let mut angles = [0usize; 4];
        for _ in 0..10_000 {
            let spec = catalog.sample_stimulus(&constraints, &mut rng).unwrap();
            assert_eq!(spec.category, "cars");
            counts[spec.identity as usize] += 1;
            angles[spec.view_angle as usize] += 1;
        }
        for c in counts {
            let f = c as f64 / 10_000.0;
            assert!((0.105..=0.145).contains(&f), "identity frequency {f}");
        }
        for c in angles {
            let f = c as f64 / 10_000.0;
            assert!((f - 0.25).abs() <= 0.03, "view angle frequency {f}");
        }
    }

    #[test]
    fn duplicate_category_is_rejected() {
        let space = AttributeSpace {
            categories: vec!["cars".into(), "cars".into()],
            ..AttributeSpace::default()
        };
        assert!(matches!(space.validate(), Err(CatalogError::DuplicateName { .. })));
    }

    #[test]
    fn uppercase_names_are_rejected() {
        let space = AttributeSpace {
            categories: vec!["Cars".into()],
            ..AttributeSpace::default()
        };
        assert!(matches!(space.validate(), Err(CatalogError::InvalidName { .. })));
    }
}
