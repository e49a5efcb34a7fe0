use core::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pt {
    pub x: f64,
    pub y: f64,
}

impl Pt {
    pub const fn new(x: f64, y: f64) -> Self {
        Pt { x, y }
    }

    pub fn dot(self, o: Pt) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Pt) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dist(self, o: Pt) -> f64 {
        (self - o).norm()
    }

    pub fn rot90(self) -> Pt {
        Pt::new(-self.y, self.x)
    }

    pub fn rotate(self, theta: f64) -> Pt {
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        Pt::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn unit(self) -> Option<Pt> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Direction of the line through the origin along `self`, encoded as the
    /// unit complex number `(v/|v|)^2` so that opposite vectors agree.
    pub fn line_dir(self) -> Pt {
        let n2 = self.dot(self);
        if n2 == 0.0 {
            return Pt::new(f64::NAN, f64::NAN);
        }
        Pt::new((self.x * self.x - self.y * self.y) / n2, 2.0 * self.x * self.y / n2)
    }

    /// Complex product `self * conj(o)`.
    pub fn mul_conj(self, o: Pt) -> Pt {
        Pt::new(self.x * o.x + self.y * o.y, self.y * o.x - self.x * o.y)
    }
}

impl Add for Pt {
    type Output = Pt;
    fn add(self, o: Pt) -> Pt {
        Pt::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Pt {
    type Output = Pt;
    fn sub(self, o: Pt) -> Pt {
        Pt::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Pt {
    type Output = Pt;
    fn mul(self, k: f64) -> Pt {
        Pt::new(self.x * k, self.y * k)
    }
}

pub fn midpoint(a: Pt, b: Pt) -> Pt {
    (a + b) * 0.5
}

/// Orthogonal projection of `p` on line `ab`.
pub fn foot(p: Pt, a: Pt, b: Pt) -> Option<Pt> {
    let d = b - a;
    let n2 = d.dot(d);
    if n2 == 0.0 {
        return None;
    }
    Some(a + d * ((p - a).dot(d) / n2))
}

pub fn reflect(p: Pt, a: Pt, b: Pt) -> Option<Pt> {
    foot(p, a, b).map(|f| f * 2.0 - p)
}

pub fn line_line(a: Pt, b: Pt, c: Pt, d: Pt) -> Option<Pt> {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    let scale = r.norm() * s.norm();
    if scale == 0.0 || libm::fabs(denom) < 1e-12 * scale {
        return None;
    }
    let t = (c - a).cross(s) / denom;
    Some(a + r * t)
}

pub fn circumcenter(a: Pt, b: Pt, c: Pt) -> Option<Pt> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let l = (b - a).norm().max((c - a).norm());
    let scale = l * l;
    if scale == 0.0 || libm::fabs(d) < 1e-12 * scale {
        return None;
    }
    let a2 = a.dot(a);
    let b2 = b.dot(b);
    let c2 = c.dot(c);
    Some(Pt::new(
        (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
        (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d,
    ))
}

/// Intersections of line `ab` with the circle of center `o` and radius `r`,
/// ordered by the line parameter.
pub fn line_circle(a: Pt, b: Pt, o: Pt, r: f64) -> Option<[Pt; 2]> {
    let d = b - a;
    let f = a - o;
    let qa = d.dot(d);
    if qa == 0.0 {
        return None;
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.dot(f) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < -1e-12 * libm::fabs(qb).max(qa * r * r) {
        return None;
    }
    let s = libm::sqrt(disc.max(0.0));
    let t1 = (-qb - s) / (2.0 * qa);
    let t2 = (-qb + s) / (2.0 * qa);
    Some([a + d * t1, a + d * t2])
}
