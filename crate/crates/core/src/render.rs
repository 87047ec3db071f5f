//! Room order along edges, room rectangles and SVG drawings.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::model::{FloorPlanTemplate, Instance, Placement, Rect, Side};
use crate::pipeline::{Fraction, MultiFloorSolution};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("template {0} carries no geometry")]
    NoGeometry(String),
    #[error("edge {edge} of template {template} is overfull by {excess} m²")]
    Overfull { template: String, edge: String, excess: f64 },
}

/// Ends of an edge in walking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum End {
    Start,
    End,
}

/// Which end of `edge` touches `corner`. Uses the drawing when there is one;
/// otherwise `corner.edges[0]` ends at the corner and `corner.edges[1]`
/// starts there.
pub fn corner_end(template: &FloorPlanTemplate, corner: usize, edge: usize) -> End {
    let c = &template.corners[corner];
    if let Some(geo) = &template.geometry {
        let cr = geo.corners[corner];
        let (a, b) = edge_ends(&geo.edges[edge].rect, geo.edges[edge].side);
        let centre = (cr.x + cr.w / 2.0, cr.y + cr.h / 2.0);
        let d = |p: (f64, f64)| (p.0 - centre.0).hypot(p.1 - centre.1);
        return if d(a) <= d(b) { End::Start } else { End::End };
    }
    if c.edges[0] == edge {
        End::End
    } else {
        End::Start
    }
}

/// Midpoints of the two short sides of an edge strip, in walking order.
fn edge_ends(r: &Rect, side: Side) -> ((f64, f64), (f64, f64)) {
    let (l, rt, b, t) = (r.x, r.x + r.w, r.y, r.y + r.h);
    let (my, mx) = (r.y + r.h / 2.0, r.x + r.w / 2.0);
    match side {
        Side::Bottom => ((l, my), (rt, my)),
        Side::Right => ((mx, b), (mx, t)),
        Side::Top => ((rt, my), (l, my)),
        Side::Left => ((mx, t), (mx, b)),
    }
}

/// One room drawn on an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderedRoom {
    pub group: usize,
    pub size: usize,
    /// Set for the strip of a corner room that extends into this edge.
    pub corner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSequence {
    pub edge: usize,
    /// Rooms from the start of the edge to its end.
    pub rooms: Vec<OrderedRoom>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderedLayout {
    pub floor: usize,
    /// One entry per edge of the floor, possibly empty.
    pub edges: Vec<EdgeSequence>,
}

impl OrderedLayout {
    pub fn num_rooms(&self) -> usize {
        self.edges.iter().map(|e| e.rooms.len()).sum()
    }
}

/// Orders the rooms on every edge of floor `f`. Corner strips sit at their
/// corner's end. Edge rooms form one block per group; a group holding the
/// corner at the start comes first, one holding the corner at the end comes
/// last, the rest follow in group order. Within a block rooms go by size index.
pub fn order_rooms(placement: &Placement, template: &FloorPlanTemplate, f: usize) -> OrderedLayout {
    let part = placement.floor_part(f);
    let corner_group: Vec<Option<usize>> = (0..template.corners.len())
        .map(|v| part.corner_rooms.iter().find(|r| r.corner == v).map(|r| r.group))
        .collect();
    let edges = (0..template.edges.len())
        .map(|e| {
            let at = |end: End| -> (Option<OrderedRoom>, Option<usize>) {
                let mut strip = None;
                let mut neighbour = None;
                for (v, _) in template.corners_of_edge(e) {
                    if corner_end(template, v, e) != end {
                        continue;
                    }
                    neighbour = neighbour.or(corner_group[v]);
                    if let Some(r) = part.corner_rooms.iter().find(|r| r.corner == v && r.edge == e) {
                        strip = Some(OrderedRoom { group: r.group, size: r.size, corner: Some(v) });
                    }
                }
                (strip, neighbour)
            };
            let (start_strip, start_group) = at(End::Start);
            let (end_strip, end_group) = at(End::End);
            let groups: BTreeSet<usize> = part.edge_rooms.keys().filter(|s| s.edge == e).map(|s| s.group).collect();
            let mut order: Vec<usize> = groups.into_iter().collect();
            let rank = |g: usize| {
                if Some(g) == start_group {
                    0
                } else if Some(g) == end_group {
                    2
                } else {
                    1
                }
            };
            order.sort_by_key(|&g| (rank(g), g));
            let mut rooms: Vec<OrderedRoom> = start_strip.into_iter().collect();
            for g in order {
                for (slot, &count) in part.edge_rooms.iter().filter(|(s, _)| s.edge == e && s.group == g) {
                    rooms.extend((0..count).map(|_| OrderedRoom { group: g, size: slot.size, corner: None }));
                }
            }
            rooms.extend(end_strip);
            EdgeSequence { edge: e, rooms }
        })
        .collect();
    OrderedLayout { floor: f, edges }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoomShape {
    pub group: usize,
    pub size: usize,
    /// Scaled area.
    pub area: f64,
    /// One rectangle for an edge room; corner block plus strip for a corner room.
    pub rects: Vec<Rect>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloorShapes {
    pub rooms: Vec<RoomShape>,
    /// Unused edge area.
    pub gaps: Vec<Rect>,
}

impl FloorShapes {
    pub fn room_area(&self) -> f64 {
        self.rooms.iter().flat_map(|r| &r.rects).map(Rect::area).sum()
    }

    pub fn gap_area(&self) -> f64 {
        self.gaps.iter().map(Rect::area).sum()
    }

    /// Largest pairwise overlap among all room and gap rectangles.
    pub fn max_overlap(&self) -> f64 {
        let all: Vec<&Rect> = self.rooms.iter().flat_map(|r| &r.rects).chain(&self.gaps).collect();
        let mut worst: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                worst = worst.max(a.overlap(b));
            }
        }
        worst
    }
}

/// Piece of an edge strip from `t0` to `t1` meters along the walking direction.
fn strip_piece(r: &Rect, side: Side, t0: f64, t1: f64) -> Rect {
    match side {
        Side::Bottom => Rect::new(r.x + t0, r.y, t1 - t0, r.h),
        Side::Right => Rect::new(r.x, r.y + t0, r.w, t1 - t0),
        Side::Top => Rect::new(r.x + r.w - t1, r.y, t1 - t0, r.h),
        Side::Left => Rect::new(r.x, r.y + r.h - t1, r.w, t1 - t0),
    }
}

const LENGTH_TOL: f64 = 1e-6;

/// Rectangles for every room of an ordered floor with sizes multiplied by
/// `factor`. Rooms run from the corridor to the outline; leftover length on
/// an edge becomes a gap in front of the end strip.
pub fn realize_geometry(
    ordered: &OrderedLayout,
    template: &FloorPlanTemplate,
    sizes: &[f64],
    factor: f64,
) -> Result<FloorShapes, RenderError> {
    let geo = template.geometry.as_ref().ok_or_else(|| RenderError::NoGeometry(template.id.clone()))?;
    let mut rooms = Vec::new();
    let mut gaps = Vec::new();
    for seq in &ordered.edges {
        let edge = &template.edges[seq.edge];
        let eg = &geo.edges[seq.edge];
        let len_of = |r: &OrderedRoom| {
            let area = sizes[r.size] * factor;
            match r.corner {
                Some(v) => (area - template.corners[v].capacity) / edge.depth,
                None => area / edge.depth,
            }
        };
        let used: f64 = seq.rooms.iter().map(len_of).sum();
        if used > edge.length + LENGTH_TOL * edge.length.max(1.0) {
            return Err(RenderError::Overfull {
                template: template.id.clone(),
                edge: edge.id.clone(),
                excess: (used - edge.length) * edge.depth,
            });
        }
        let gap = (edge.length - used).max(0.0);
        let gap_at = seq
            .rooms
            .last()
            .filter(|r| r.corner.is_some_and(|v| corner_end(template, v, seq.edge) == End::End))
            .map(|_| seq.rooms.len() - 1);
        let mut t = 0.0;
        for (i, r) in seq.rooms.iter().enumerate() {
            if Some(i) == gap_at && gap > LENGTH_TOL {
                gaps.push(strip_piece(&eg.rect, eg.side, t, t + gap));
                t += gap;
            }
            let l = len_of(r);
            let piece = strip_piece(&eg.rect, eg.side, t, t + l);
            t += l;
            let rects = match r.corner {
                Some(v) => vec![geo.corners[v], piece],
                None => vec![piece],
            };
            rooms.push(RoomShape { group: r.group, size: r.size, area: sizes[r.size] * factor, rects });
        }
        if gap_at.is_none() && gap > LENGTH_TOL {
            gaps.push(strip_piece(&eg.rect, eg.side, t, edge.length));
        }
    }
    Ok(FloorShapes { rooms, gaps })
}

/// Order and rectangles for floor `f` of a solution.
pub fn floor_shapes(solution: &MultiFloorSolution, instance: &Instance, f: usize) -> Result<FloorShapes, RenderError> {
    let template = instance.building.floor(f);
    let ordered = order_rooms(&solution.placement, template, f);
    realize_geometry(&ordered, template, &instance.sizes, solution.floors[f].factor.value())
}

/// Fill colour of a group: a hue picked by the FNV-1a hash of its id.
pub fn group_colour(id: &str) -> String {
    let mut hash = id.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    // Final avalanche so that ids differing in one character land far apart.
    hash ^= hash >> 33;
    hash = hash.wrapping_mul(0xff51_afd7_ed55_8ccd);
    hash ^= hash >> 33;
    let hue = (hash % 360) as f64;
    let light = 0.62 + ((hash >> 16) % 3) as f64 * 0.06;
    let (s, l) = (0.55, light);
    let c = (1.0 - (2.0 * l - 1.0_f64).abs()) * s;
    let hp = hue / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// Pixels per meter.
const SCALE: f64 = 10.0;
const MARGIN: f64 = 20.0;
const TITLE: f64 = 24.0;
const LEGEND_ROW: f64 = 18.0;

fn px(v: f64) -> String {
    format!("{:.2}", v * SCALE)
}

fn rect_el(out: &mut String, r: &Rect, height: f64, attrs: &str) {
    let _ = writeln!(
        out,
        "    <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {attrs}/>",
        px(r.x),
        px(height - r.y - r.h),
        px(r.w),
        px(r.h)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Draws one floor into a `<g>` translated by `dy` pixels.
fn floor_group(out: &mut String, instance: &Instance, f: usize, shapes: &FloorShapes, factor: Fraction, dy: f64) {
    let t = instance.building.floor(f);
    let geo = t.geometry.as_ref().expect("checked by caller");
    let h = geo.height;
    let _ = writeln!(out, "  <g id=\"floor-{}\" transform=\"translate({MARGIN:.2},{:.2})\">", f + 1, dy + TITLE);
    let scaled = factor != Fraction::ONE;
    let title = if scaled {
        format!("Floor {} ({}), sizes scaled by {}", f + 1, escape(&t.id), factor)
    } else {
        format!("Floor {} ({})", f + 1, escape(&t.id))
    };
    let _ = writeln!(out, "    <text x=\"0.00\" y=\"-8.00\" font-size=\"14\">{title}</text>");
    rect_el(
        out,
        &Rect::new(0.0, 0.0, geo.width, geo.height),
        h,
        "fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"2\"",
    );
    rect_el(out, &geo.inner, h, "fill=\"#eeeeee\" stroke=\"#999999\"");
    for r in &geo.blocked {
        rect_el(out, r, h, "fill=\"#9e9e9e\" stroke=\"#616161\"");
    }
    for r in &geo.stairs {
        rect_el(out, r, h, "fill=\"url(#stairs)\" stroke=\"#424242\"");
    }
    for r in &shapes.gaps {
        rect_el(out, r, h, "fill=\"#ffffff\" stroke=\"#bdbdbd\" stroke-dasharray=\"4,3\"");
    }
    for room in &shapes.rooms {
        let colour = group_colour(&instance.groups[room.group]);
        for r in &room.rects {
            rect_el(out, r, h, &format!("fill=\"{colour}\" stroke=\"#212121\""));
        }
        let main = room.rects.last().expect("rooms have a rectangle");
        let _ = writeln!(
            out,
            "    <text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">{}</text>",
            px(main.x + main.w / 2.0),
            px(h - main.y - main.h / 2.0),
            escape(&instance.groups[room.group])
        );
    }
    if scaled {
        // Red segment along the corridor side of every edge that holds rooms.
        let occupied: BTreeSet<usize> = shapes
            .rooms
            .iter()
            .flat_map(|r| &r.rects)
            .filter_map(|r| geo.edges.iter().position(|e| e.rect.overlap(r) > 0.0))
            .collect();
        for e in occupied {
            let eg = &geo.edges[e];
            let r = eg.rect;
            let (x1, y1, x2, y2) = match eg.side {
                Side::Bottom => (r.x, r.y + r.h, r.x + r.w, r.y + r.h),
                Side::Top => (r.x, r.y, r.x + r.w, r.y),
                Side::Right => (r.x, r.y, r.x, r.y + r.h),
                Side::Left => (r.x + r.w, r.y, r.x + r.w, r.y + r.h),
            };
            let _ = writeln!(
                out,
                "    <line class=\"scaled\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#d50000\" stroke-width=\"3\"/>",
                px(x1),
                px(h - y1),
                px(x2),
                px(h - y2)
            );
        }
    }
    let _ = writeln!(out, "  </g>");
}

fn legend(out: &mut String, instance: &Instance, groups: &BTreeSet<usize>, y: f64) {
    let _ = writeln!(out, "  <g id=\"legend\" transform=\"translate({MARGIN:.2},{y:.2})\">");
    for (i, &g) in groups.iter().enumerate() {
        let row = i as f64 * LEGEND_ROW;
        let _ = writeln!(
            out,
            "    <rect x=\"0.00\" y=\"{row:.2}\" width=\"12.00\" height=\"12.00\" fill=\"{}\" stroke=\"#212121\"/>",
            group_colour(&instance.groups[g])
        );
        let _ = writeln!(
            out,
            "    <text x=\"18.00\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            row + 10.0,
            escape(&instance.groups[g])
        );
    }
    let _ = writeln!(out, "  </g>");
}

fn document(instance: &Instance, solution: &MultiFloorSolution, floors: &[usize]) -> Result<String, RenderError> {
    let mut body = String::new();
    let mut dy = MARGIN;
    let mut width: f64 = 0.0;
    let mut groups = BTreeSet::new();
    for &f in floors {
        let t = instance.building.floor(f);
        let geo = t.geometry.as_ref().ok_or_else(|| RenderError::NoGeometry(t.id.clone()))?;
        let shapes = floor_shapes(solution, instance, f)?;
        groups.extend(shapes.rooms.iter().map(|r| r.group));
        floor_group(&mut body, instance, f, &shapes, solution.floors[f].factor, dy);
        dy += TITLE + geo.height * SCALE + MARGIN;
        width = width.max(geo.width * SCALE);
    }
    legend(&mut body, instance, &groups, dy);
    dy += groups.len() as f64 * LEGEND_ROW + MARGIN;
    let (w, h) = (width + 2.0 * MARGIN, dy);
    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.2}\" height=\"{h:.2}\" viewBox=\"0 0 {w:.2} {h:.2}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(out, "  <title>{}</title>", escape(&instance.name));
    out.push_str(concat!(
        "  <defs>\n",
        "    <pattern id=\"stairs\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">\n",
        "      <rect width=\"6\" height=\"6\" fill=\"#e0e0e0\"/>\n",
        "      <line x1=\"0\" y1=\"0\" x2=\"6\" y2=\"0\" stroke=\"#424242\"/>\n",
        "    </pattern>\n",
        "  </defs>\n",
    ));
    out.push_str(&body);
    out.push_str("</svg>\n");
    Ok(out)
}

/// All floors stacked with the top floor uppermost, or one document per floor.
pub fn render_svg(
    solution: &MultiFloorSolution,
    instance: &Instance,
    per_floor: bool,
) -> Result<Vec<String>, RenderError> {
    let n = instance.building.num_floors();
    if per_floor {
        (0..n).map(|f| document(instance, solution, &[f])).collect()
    } else {
        Ok(vec![document(instance, solution, &(0..n).rev().collect::<Vec<_>>())?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{template, TemplateId};
    use crate::model::{CornerRoom, EdgeSlot};

    fn long_side(r: &Rect, depth: f64) -> f64 {
        if (r.w - depth).abs() < 1e-9 {
            r.h
        } else {
            r.w
        }
    }

    fn edge_room(group: usize, size: usize, edge: usize) -> EdgeSlot {
        EdgeSlot { group, size, floor: 0, edge }
    }

    #[test]
    fn room_width_is_area_over_depth() {
        let t = template(TemplateId::S);
        let mut p = Placement::default();
        p.add_edge_rooms(edge_room(0, 0, 0), 1);
        let shapes = realize_geometry(&order_rooms(&p, &t, 0), &t, &[6.0], 1.0).unwrap();
        let r = &shapes.rooms[0].rects[0];
        assert!((r.area() - 6.0).abs() < 1e-9);
        assert!((long_side(r, 3.0) - 2.0).abs() < 1e-9);
        let edge_area: f64 = t.edges.iter().map(|e| e.capacity).sum();
        assert!((shapes.gap_area() - (edge_area - 6.0)).abs() < 1e-9);
    }

    #[test]
    fn full_edge_leaves_no_gap() {
        let t = template(TemplateId::S);
        let mut p = Placement::default();
        let sizes: Vec<f64> = t.edges.iter().map(|e| e.capacity / 3.0).collect();
        for e in 0..t.edges.len() {
            p.add_edge_rooms(edge_room(0, e, e), 3);
        }
        let shapes = realize_geometry(&order_rooms(&p, &t, 0), &t, &sizes, 1.0).unwrap();
        assert_eq!(shapes.gaps, Vec::<Rect>::new());
        assert!((shapes.room_area() - t.edges.iter().map(|e| e.capacity).sum::<f64>()).abs() < 1e-9);
        assert_eq!(shapes.max_overlap(), 0.0);
    }

    #[test]
    fn corner_room_is_block_plus_strip() {
        let t = template(TemplateId::S);
        let (v, corner) = t.corners.iter().enumerate().next().unwrap();
        let e = corner.edges[1];
        let mut p = Placement::default();
        p.corner_rooms.push(CornerRoom { group: 0, size: 0, floor: 0, corner: v, edge: e });
        p.add_edge_rooms(edge_room(1, 0, e), 1);
        let ordered = order_rooms(&p, &t, 0);
        let rooms = &ordered.edges[e].rooms;
        let strip_first = corner_end(&t, v, e) == End::Start;
        assert_eq!(rooms[if strip_first { 0 } else { 1 }].corner, Some(v));
        let shapes = realize_geometry(&ordered, &t, &[15.0], 1.0).unwrap();
        let room = shapes.rooms.iter().find(|r| r.group == 0).unwrap();
        assert_eq!(room.rects.len(), 2);
        assert!((room.rects[0].area() - corner.capacity).abs() < 1e-9);
        let depth = t.edges[e].depth;
        assert!((long_side(&room.rects[1], depth) - (15.0 - corner.capacity) / depth).abs() < 1e-9);
        assert_eq!(shapes.max_overlap(), 0.0);
    }

    #[test]
    fn group_holding_the_end_corner_goes_last() {
        let t = template(TemplateId::S);
        let (v, corner) = t.corners.iter().enumerate().next().unwrap();
        let e = corner.edges[0];
        assert_eq!(corner_end(&t, v, e), End::End);
        let mut p = Placement::default();
        p.corner_rooms.push(CornerRoom { group: 0, size: 0, floor: 0, corner: v, edge: corner.edges[1] });
        p.add_edge_rooms(edge_room(0, 0, e), 1);
        p.add_edge_rooms(edge_room(1, 0, e), 1);
        let groups: Vec<usize> = order_rooms(&p, &t, 0).edges[e].rooms.iter().map(|r| r.group).collect();
        assert_eq!(groups, vec![1, 0]);
    }

    #[test]
    fn overfull_edges_and_missing_geometry_are_errors() {
        let t = template(TemplateId::S);
        let mut p = Placement::default();
        p.add_edge_rooms(edge_room(0, 0, 0), 4);
        let ordered = order_rooms(&p, &t, 0);
        assert!(matches!(realize_geometry(&ordered, &t, &[6.0], 1.0), Err(RenderError::Overfull { .. })));
        assert!(realize_geometry(&ordered, &t, &[6.0], 0.9).is_ok());
        let mut bare = t.clone();
        bare.geometry = None;
        assert!(matches!(realize_geometry(&ordered, &bare, &[6.0], 0.5), Err(RenderError::NoGeometry(_))));
    }

    #[test]
    fn colours_are_stable_hex() {
        let c = group_colour("M1");
        assert_eq!(c, group_colour("M1"));
        assert_ne!(c, group_colour("M11"));
        assert!(c.starts_with('#') && c.len() == 7 && c[1..].chars().all(|x| x.is_ascii_hexdigit()));
    }
}
