//! Adaptive Gauss–Kronrod (7, 15) quadrature.

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Cap on the number of subintervals one call may create.
const MAX_INTERVALS: usize = 100_000;

/// `∫_a^b f` to relative tolerance `rtol` (absolute floor `atol`).
///
/// Refinement is depth-first and capped: once [`MAX_INTERVALS`] subintervals
/// have been created, the remaining pieces keep their 15-point estimates.
pub(crate) fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rtol: f64, atol: f64) -> f64 {
    struct Ctx<'a> {
        f: &'a dyn Fn(f64) -> f64,
        rtol: f64,
        budget: usize,
    }
    fn rec(ctx: &mut Ctx<'_>, a: f64, b: f64, whole: (f64, f64), atol: f64, depth: u32) -> f64 {
        let (val, err) = whole;
        let tiny = (b - a).abs() <= 1e-15 * a.abs().max(b.abs());
        if err <= (ctx.rtol * val.abs()).max(atol) || depth == 0 || tiny || ctx.budget < 2 {
            return val;
        }
        ctx.budget -= 2;
        let m = 0.5 * (a + b);
        let left = gk15(ctx.f, a, m);
        let right = gk15(ctx.f, m, b);
        rec(ctx, a, m, left, 0.5 * atol, depth - 1) + rec(ctx, m, b, right, 0.5 * atol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let mut ctx = Ctx { f, rtol, budget: MAX_INTERVALS };
    let whole = gk15(f, a, b);
    rec(&mut ctx, a, b, whole, atol, 60)
}

/// `∫_0^s f` for integrands that may vary over many scales: dyadic pieces
/// `[s 2^{-k-1}, s 2^{-k}]` down to a negligible remainder near zero.
pub(crate) fn integrate_from_zero(f: &dyn Fn(f64) -> f64, s: f64, rtol: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut hi = s;
    for _ in 0..80 {
        let lo = 0.5 * hi;
        let piece = integrate(f, lo, hi, rtol, 0.0);
        total += piece;
        hi = lo;
        if piece.abs() <= 1e-17 * total.abs() {
            break;
        }
    }
    total + integrate(f, 0.0, hi, rtol, 1e-300)
}
