//! Scenario files bundled into the binary.

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../presets/", $name, ".toml")))),*]
    };
}

/// `(name, scenario text)` for every bundled preset.
pub const PRESETS: &[(&str, &str)] = presets![
    "fig2", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig4", "fig5a", "fig5b", "fig6", "fig7a",
    "fig7b", "fig7c", "fig7d", "fig8", "fig9a", "fig9b",
];

pub fn find(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}
