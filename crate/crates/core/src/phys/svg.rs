//! SVG rendering of a placed floorplan.
//!
//! Color scheme follows the usual layout-screenshot convention: scratchpad
//! macros red, register latch columns blue, functional units yellow; the
//! shuffling block is green and baseline muxes are gray. Output bytes are
//! deterministic for a fixed floorplan.

use std::fmt::Write;

use super::{BlockKind, Floorplan};

const CANVAS: f64 = 720.0;
const MARGIN: f64 = 24.0;

fn fill_for(kind: BlockKind) -> &'static str {
    match kind {
        BlockKind::Spm => "#d64545",
        BlockKind::Vwr => "#4569d6",
        BlockKind::Vfu => "#e8c514",
        BlockKind::Shuffler => "#3fa34d",
        BlockKind::Mux => "#8a8a8a",
    }
}

/// Renders the floorplan to a standalone SVG document.
pub fn floorplan_svg(plan: &Floorplan) -> String {
    let scale = (CANVAS - 2.0 * MARGIN) / plan.core.width().max(plan.core.height());
    let width = plan.core.width() * scale + 2.0 * MARGIN;
    let height = plan.core.height() * scale + 2.0 * MARGIN;
    // svg y grows downward; flip so lly sits at the bottom
    let fy = |y: f64| height - MARGIN - y * scale;
    let fx = |x: f64| MARGIN + x * scale;

    let mut svg = String::new();
    write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    )
    .unwrap();
    write!(
        svg,
        r#"<title>{} ({})</title>"#,
        plan.config_name, plan.style
    )
    .unwrap();
    write!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#fafafa" stroke="#222" stroke-width="1.5"/>"##,
        fx(plan.core.llx),
        fy(plan.core.ury),
        plan.core.width() * scale,
        plan.core.height() * scale
    )
    .unwrap();
    for block in &plan.blocks {
        write!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.85" stroke="#333" stroke-width="0.4"><title>{}</title></rect>"##,
            fx(block.rect.llx),
            fy(block.rect.ury),
            block.rect.width() * scale,
            block.rect.height() * scale,
            fill_for(block.kind),
            block.name
        )
        .unwrap();
    }
    write!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="12">{} / {}</text>"#,
        MARGIN, 14.0, plan.config_name, plan.style
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use crate::phys::{build_floorplan, Style, UnitAreaParams};

    #[test]
    fn svg_is_deterministic_and_colored() {
        let plan = build_floorplan(
            &preset("E").unwrap(),
            &UnitAreaParams::default(),
            Style::Direct,
        )
        .unwrap();
        let one = floorplan_svg(&plan);
        let two = floorplan_svg(&plan);
        assert_eq!(one, two);
        assert!(one.contains("#d64545"), "scratchpad red");
        assert!(one.contains("#4569d6"), "latch blue");
        assert!(one.contains("#e8c514"), "unit yellow");
        assert!(one.starts_with("<svg"));
        assert!(one.ends_with("</svg>\n"));
    }
}
