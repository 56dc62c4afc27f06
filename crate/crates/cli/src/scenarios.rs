//! Scenario files shipped with the binary.

use crate::config::{self, ConfigError, Scenario};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        /// `(name, TOML source)` of every bundled scenario.
        pub const BUNDLED: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../scenarios/", $name, ".toml")))),*
        ];
    };
}

bundled!(
    "exp2-symbol",
    "exp2-roots",
    "kawahara-roots",
    "hyperbolic-half",
    "weighted-path-flow",
    "weighted-front-index",
    "constant-oracle",
    "weyl-principal",
    "weyl-infinity",
    "exp2-wavetrain",
    "exp2-manifold",
    "acceptance-all",
);

pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load_bundled(name: &str) -> Option<Result<Scenario, ConfigError>> {
    bundled_source(name).map(|src| config::parse(&format!("bundled:{name}"), src))
}

/// Resolves a command-line argument: an existing file path first, then a
/// bundled scenario name.
pub fn resolve(arg: &str) -> Result<Scenario, ConfigError> {
    let path = std::path::Path::new(arg);
    if path.is_file() {
        return config::load_path(path);
    }
    load_bundled(arg).unwrap_or_else(|| {
        Err(ConfigError {
            source_name: arg.to_string(),
            line: None,
            field: String::new(),
            message: "no such file or bundled scenario (see `list-scenarios`)".into(),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_scenario_validates() {
        for (name, _) in BUNDLED {
            let s = load_bundled(name).unwrap().unwrap_or_else(|e| panic!("{e}"));
            assert_eq!(s.name(), *name);
        }
    }
}
