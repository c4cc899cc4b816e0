//! Bundled historical snapshots.
//!
//! Population is stored in billions of persons and GDP in billions of 1990
//! International Geary-Khamis dollars, so fitted reciprocal constants come
//! out at the magnitudes usually quoted for these series. Each file records
//! its source, rescaling and transcription date in `#` directives.

use crate::series::{parse_csv, TimeSeries};
use crate::{Error, Result};

const BUNDLED: &[(&str, &str)] = &[
    (
        "world_population",
        include_str!("../data/world_population.csv"),
    ),
    (
        "africa_population",
        include_str!("../data/africa_population.csv"),
    ),
    (
        "western_europe_gdp",
        include_str!("../data/western_europe_gdp.csv"),
    ),
    ("world_gdp", include_str!("../data/world_gdp.csv")),
];

/// Identifiers accepted by [`load_bundled`].
pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(name, _)| *name).collect()
}

/// Raw CSV text of a bundled snapshot.
pub fn bundled_csv(name: &str) -> Result<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::NotFound {
            kind: "dataset",
            name: name.to_string(),
            valid: bundled_names().into_iter().map(String::from).collect(),
        })
}

pub fn load_bundled(name: &str) -> Result<TimeSeries> {
    parse_csv(bundled_csv(name)?)
}
