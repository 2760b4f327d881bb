use std::fmt::Write as _;

use super::{ActivationSummary, Interpolation, SpectralActivationMap};
use crate::error::{Error, Result};
use crate::nn::mse;
use crate::pipeline::fmt_f64;
use crate::signal::{channel_index, CHANNEL_POSITIONS};

/// `dim,activation,rank` with rank 0 the most activated.
pub fn activation_csv(summary: &ActivationSummary) -> String {
    let mut rank = vec![0; summary.activation.len()];
    for (r, &d) in summary.mads.iter().enumerate() {
        rank[d] = r;
    }
    let mut s = String::from("dim,activation,rank\n");
    for (d, a) in summary.activation.iter().enumerate() {
        let _ = writeln!(s, "{d},{},{}", fmt_f64(*a), rank[d]);
    }
    s
}

/// `dim,band,channel,value` for the requested dimensions.
pub fn topomap_csv(map: &SpectralActivationMap, dims: &[usize], channels: &[String]) -> Result<String> {
    let mut s = String::from("dim,band,channel,value\n");
    for &j in dims {
        let m = map
            .maps
            .get(j)
            .ok_or_else(|| Error::Config(format!("dimension {j} outside latent size {}", map.maps.len())))?;
        if m.cols() != channels.len() {
            return Err(Error::Dimension(format!(
                "map has {} channels, {} labels given",
                m.cols(),
                channels.len()
            )));
        }
        for (b, band) in map.bands.iter().enumerate() {
            for (c, label) in channels.iter().enumerate() {
                let _ = writeln!(s, "{j},{:?},{label},{}", band.name, fmt_f64(m.get(b, c)));
            }
        }
    }
    Ok(s)
}

/// Every dimension of the map.
pub fn spectral_csv(map: &SpectralActivationMap, channels: &[String]) -> Result<String> {
    let dims: Vec<usize> = (0..map.maps.len()).collect();
    topomap_csv(map, &dims, channels)
}

/// `step,lambda,mse_to_start,mse_to_end` along the decoded path.
pub fn interpolation_csv(interp: &Interpolation) -> Result<String> {
    let (first, last) = match (interp.decoded.first(), interp.decoded.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(String::from("step,lambda,mse_to_start,mse_to_end\n")),
    };
    let mut s = String::from("step,lambda,mse_to_start,mse_to_end\n");
    for (m, (lambda, y)) in interp.lambdas.iter().zip(&interp.decoded).enumerate() {
        let _ = writeln!(
            s,
            "{m},{},{},{}",
            fmt_f64(*lambda),
            fmt_f64(mse(y, first)?),
            fmt_f64(mse(y, last)?)
        );
    }
    Ok(s)
}

const SVG_SIZE: f64 = 320.0;
const HEAD_RADIUS: f64 = 120.0;

/// Blue (negative) to white to red (positive), symmetric around zero.
fn diverging(v: f64, vmax: f64) -> (u8, u8, u8) {
    let t = if vmax > 0.0 { (v / vmax).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |k: f64| (255.0 * (1.0 - k.abs())).round() as u8;
    if t >= 0.0 {
        (255, fade(t), fade(t))
    } else {
        (fade(t), fade(t), 255)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scalp map with one colored disc per electrode. Labels must belong to the
/// standard 19-channel montage.
pub fn topomap_svg(values: &[f64], channels: &[String], title: &str) -> Result<String> {
    if values.len() != channels.len() {
        return Err(Error::Dimension(format!(
            "{} values for {} channels",
            values.len(),
            channels.len()
        )));
    }
    let vmax = values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let c = SVG_SIZE / 2.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{}" viewBox="0 0 {SVG_SIZE} {}">"#,
        SVG_SIZE + 30.0,
        SVG_SIZE + 30.0
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{c}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    let cy = c + 20.0;
    let _ = writeln!(
        s,
        r#"<circle cx="{c}" cy="{cy}" r="{HEAD_RADIUS}" fill="none" stroke="black" stroke-width="2"/>"#
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{},{} {c},{} {},{}" fill="none" stroke="black" stroke-width="2"/>"#,
        c - 12.0,
        cy - HEAD_RADIUS + 2.0,
        cy - HEAD_RADIUS - 14.0,
        c + 12.0,
        cy - HEAD_RADIUS + 2.0
    );
    for (v, label) in values.iter().zip(channels) {
        let i = channel_index(label)
            .ok_or_else(|| Error::Config(format!("channel {label} has no scalp position")))?;
        let (x, y) = CHANNEL_POSITIONS[i];
        let px = c + 0.85 * HEAD_RADIUS * x;
        let py = cy - 0.85 * HEAD_RADIUS * y;
        let (r, g, b) = diverging(*v, vmax);
        let _ = writeln!(
            s,
            r##"<circle cx="{px:.1}" cy="{py:.1}" r="13" fill="#{r:02x}{g:02x}{b:02x}" stroke="black"><title>{} {}</title></circle>"##,
            escape(label),
            fmt_f64(*v)
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="9">{}</text>"#,
            py + 3.0,
            escape(label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{c}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">max |value| {:.3e}</text>"#,
        SVG_SIZE + 22.0,
        vmax
    );
    s.push_str("</svg>\n");
    Ok(s)
}
