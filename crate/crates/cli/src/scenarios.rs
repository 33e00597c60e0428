//! Scenario configs compiled into the binary, runnable with `--scenario`.

macro_rules! embedded {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../scenarios/", $name, ".json")))),*]
    };
}

const SCENARIOS: &[(&str, &str)] = embedded![
    "four_torus",
    "kodaira_thurston",
    "negative_square",
    "perturbed_alpha",
    "cone_query",
    "flow_demo",
    "decompose",
    "certify_four_torus",
];

/// Inputs referenced by built-in scenarios.
const DATA: &[(&str, &str)] = &[("four_torus_omega.json", include_str!("../scenarios/four_torus_omega.json"))];

pub fn lookup(name: &str) -> Option<(&'static str, &'static str)> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    SCENARIOS.iter().find(|(n, _)| *n == name).copied()
}

pub fn names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|(n, _)| *n).collect()
}

pub(crate) fn data_file(name: &str) -> Option<&'static str> {
    DATA.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
