//! Scenario presets, shipped as config files.

const PRESETS: &[(&str, &str)] = &[
    ("fig1a", include_str!("../presets/fig1a.toml")),
    ("fig1b", include_str!("../presets/fig1b.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5a", include_str!("../presets/fig5a.toml")),
    ("fig5b", include_str!("../presets/fig5b.toml")),
    ("fig5c", include_str!("../presets/fig5c.toml")),
    ("fig5d", include_str!("../presets/fig5d.toml")),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn all_presets_parse() {
        for name in names() {
            parse_config(text(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
