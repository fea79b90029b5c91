#include "plqp/bls12_381.hpp"

#include <sodium.h>

#include <array>
#include <cstring>

namespace plqp::bls {

namespace {

// ---------------------------------------------------------------------------
// Base field Fp

struct Ctx;
const Ctx& ctx();

mpz_class fp_add(const mpz_class& a, const mpz_class& b);
mpz_class fp_sub(const mpz_class& a, const mpz_class& b);
mpz_class fp_mul(const mpz_class& a, const mpz_class& b);
mpz_class fp_neg(const mpz_class& a);
mpz_class fp_inv(const mpz_class& a);

// ---------------------------------------------------------------------------
// Fp2 = Fp[i] / (i^2 + 1)

Fp2 f2_zero() { return Fp2{0, 0}; }
Fp2 f2_one() { return Fp2{1, 0}; }
bool f2_is_zero(const Fp2& a) { return a.c0 == 0 && a.c1 == 0; }

Fp2 f2_add(const Fp2& a, const Fp2& b) {
  return Fp2{fp_add(a.c0, b.c0), fp_add(a.c1, b.c1)};
}

Fp2 f2_sub(const Fp2& a, const Fp2& b) {
  return Fp2{fp_sub(a.c0, b.c0), fp_sub(a.c1, b.c1)};
}

Fp2 f2_neg(const Fp2& a) { return Fp2{fp_neg(a.c0), fp_neg(a.c1)}; }

Fp2 f2_conj(const Fp2& a) { return Fp2{a.c0, fp_neg(a.c1)}; }

Fp2 f2_mul(const Fp2& a, const Fp2& b) {
  mpz_class t0 = fp_mul(a.c0, b.c0);
  mpz_class t1 = fp_mul(a.c1, b.c1);
  mpz_class t2 = fp_mul(fp_add(a.c0, a.c1), fp_add(b.c0, b.c1));
  return Fp2{fp_sub(t0, t1), fp_sub(fp_sub(t2, t0), t1)};
}

Fp2 f2_sqr(const Fp2& a) {
  mpz_class t0 = fp_mul(fp_add(a.c0, a.c1), fp_sub(a.c0, a.c1));
  mpz_class t1 = fp_mul(a.c0, a.c1);
  return Fp2{t0, fp_add(t1, t1)};
}

Fp2 f2_mul_fp(const Fp2& a, const mpz_class& k) {
  return Fp2{fp_mul(a.c0, k), fp_mul(a.c1, k)};
}

Fp2 f2_inv(const Fp2& a) {
  // 1/(c0 + c1 i) = (c0 - c1 i) / (c0^2 + c1^2)
  mpz_class norm = fp_add(fp_mul(a.c0, a.c0), fp_mul(a.c1, a.c1));
  mpz_class ninv = fp_inv(norm);
  return Fp2{fp_mul(a.c0, ninv), fp_neg(fp_mul(a.c1, ninv))};
}

// Multiply by xi = 1 + i.
Fp2 f2_mul_xi(const Fp2& a) {
  return Fp2{fp_sub(a.c0, a.c1), fp_add(a.c0, a.c1)};
}

Fp2 f2_pow(const Fp2& a, const mpz_class& e) {
  Fp2 out = f2_one();
  for (ssize_t i = ssize_t(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
    out = f2_sqr(out);
    if (mpz_tstbit(e.get_mpz_t(), mp_bitcnt_t(i))) out = f2_mul(out, a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fp6 = Fp2[v] / (v^3 - xi)

Fp6 f6_zero() { return Fp6{f2_zero(), f2_zero(), f2_zero()}; }
Fp6 f6_one() { return Fp6{f2_one(), f2_zero(), f2_zero()}; }

Fp6 f6_add(const Fp6& a, const Fp6& b) {
  return Fp6{f2_add(a.c0, b.c0), f2_add(a.c1, b.c1), f2_add(a.c2, b.c2)};
}

Fp6 f6_neg(const Fp6& a) {
  return Fp6{f2_neg(a.c0), f2_neg(a.c1), f2_neg(a.c2)};
}

Fp6 f6_mul(const Fp6& a, const Fp6& b) {
  Fp2 a0b0 = f2_mul(a.c0, b.c0);
  Fp2 a1b1 = f2_mul(a.c1, b.c1);
  Fp2 a2b2 = f2_mul(a.c2, b.c2);
  Fp2 c0 = f2_add(a0b0, f2_mul_xi(f2_add(f2_mul(a.c1, b.c2), f2_mul(a.c2, b.c1))));
  Fp2 c1 = f2_add(f2_add(f2_mul(a.c0, b.c1), f2_mul(a.c1, b.c0)),
                  f2_mul_xi(a2b2));
  Fp2 c2 = f2_add(f2_add(f2_mul(a.c0, b.c2), f2_mul(a.c2, b.c0)), a1b1);
  return Fp6{c0, c1, c2};
}

Fp6 f6_sqr(const Fp6& a) { return f6_mul(a, a); }

// Multiply by v: (c0 + c1 v + c2 v^2) * v = xi*c2 + c0 v + c1 v^2.
Fp6 f6_mul_by_v(const Fp6& a) {
  return Fp6{f2_mul_xi(a.c2), a.c0, a.c1};
}

Fp6 f6_inv(const Fp6& a) {
  Fp2 t0 = f2_sub(f2_sqr(a.c0), f2_mul_xi(f2_mul(a.c1, a.c2)));
  Fp2 t1 = f2_sub(f2_mul_xi(f2_sqr(a.c2)), f2_mul(a.c0, a.c1));
  Fp2 t2 = f2_sub(f2_sqr(a.c1), f2_mul(a.c0, a.c2));
  Fp2 d = f2_add(f2_mul(a.c0, t0),
                 f2_mul_xi(f2_add(f2_mul(a.c1, t2), f2_mul(a.c2, t1))));
  Fp2 dinv = f2_inv(d);
  return Fp6{f2_mul(t0, dinv), f2_mul(t1, dinv), f2_mul(t2, dinv)};
}

// ---------------------------------------------------------------------------
// Fp12 = Fp6[w] / (w^2 - v)

Fp12 f12_one() { return Fp12{f6_one(), f6_zero()}; }

Fp12 f12_mul(const Fp12& a, const Fp12& b) {
  Fp6 a0b0 = f6_mul(a.c0, b.c0);
  Fp6 a1b1 = f6_mul(a.c1, b.c1);
  Fp6 c0 = f6_add(a0b0, f6_mul_by_v(a1b1));
  Fp6 c1 = f6_add(f6_mul(a.c0, b.c1), f6_mul(a.c1, b.c0));
  return Fp12{c0, c1};
}

Fp12 f12_sqr(const Fp12& a) {
  Fp6 a0a1 = f6_mul(a.c0, a.c1);
  Fp6 c0 = f6_add(f6_sqr(a.c0), f6_mul_by_v(f6_sqr(a.c1)));
  Fp6 c1 = f6_add(a0a1, a0a1);
  return Fp12{c0, c1};
}

// Conjugation over Fp6 = Frobenius^6; inverts unitary elements.
Fp12 f12_conj(const Fp12& a) { return Fp12{a.c0, f6_neg(a.c1)}; }

Fp12 f12_inv(const Fp12& a) {
  Fp6 d = f6_add(f6_mul(a.c0, a.c0), f6_neg(f6_mul_by_v(f6_mul(a.c1, a.c1))));
  Fp6 dinv = f6_inv(d);
  return Fp12{f6_mul(a.c0, dinv), f6_neg(f6_mul(a.c1, dinv))};
}

bool f12_is_one(const Fp12& a) { return a == f12_one(); }

Fp12 f12_pow_u64(const Fp12& a, uint64_t e) {
  Fp12 out = f12_one();
  bool started = false;
  for (int i = 63; i >= 0; --i) {
    if (started) out = f12_sqr(out);
    if ((e >> i) & 1) {
      out = f12_mul(out, a);
      started = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Context: curve constants and derived values, built once.

struct Ctx {
  mpz_class p;            // base field prime
  mpz_class r;            // subgroup order
  mpz_class p_half;       // (p-1)/2
  mpz_class sqrt_exp;     // (p+1)/4, valid since p = 3 mod 4
  uint64_t abs_u;         // |u|, the BLS parameter (u is negative)
  mpz_class h_eff_g1;     // 1 - u, effective G1 cofactor for hashing
  mpz_class g1_x, g1_y;
  Fp2 g2_x, g2_y;
  Fp2 frob[6];            // xi^{k(p-1)/6} for k = 0..5
  mpz_class b_g1;         // 4
  Fp2 b_g2;               // 4 * (1 + i)
  // Shallue-van de Woestijne constants for g(x) = x^3 + 4.
  mpz_class sw_z, sw_c1, sw_c2, sw_c3, sw_c4;
};

bool fp_is_square(const mpz_class& a, const mpz_class& p) {
  if (a == 0) return true;
  return mpz_legendre(a.get_mpz_t(), p.get_mpz_t()) == 1;
}

Ctx build_ctx() {
  Ctx c;
  c.p = mpz_class(
      "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f624"
      "1eabfffeb153ffffb9feffffffffaaab",
      16);
  c.r = mpz_class(
      "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);
  c.p_half = (c.p - 1) / 2;
  c.sqrt_exp = (c.p + 1) / 4;
  c.abs_u = 0xd201000000010000ULL;
  c.h_eff_g1 = mpz_class("d201000000010001", 16);

  c.g1_x = mpz_class(
      "17f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac58"
      "6c55e83ff97a1aeffb3af00adb22c6bb",
      16);
  c.g1_y = mpz_class(
      "08b3f481e3aaa0f1a09e30ed741d8ae4fcf5e095d5d00af600db18cb2c04b3ed"
      "d03cc744a2888ae40caa232946c5e7e1",
      16);
  c.g2_x = Fp2{mpz_class("024aa2b2f08f0a91260805272dc51051c6e47ad4fa403b02"
                         "b4510b647ae3d1770bac0326a805bbefd48056c8c121bdb8",
                         16),
               mpz_class("13e02b6052719f607dacd3a088274f65596bd0d09920b61a"
                         "b5da61bbdc7f5049334cf11213945d57e5ac7d055d042b7e",
                         16)};
  c.g2_y = Fp2{mpz_class("0ce5d527727d6e118cc9cdc6da2e351aadfd9baa8cbdd3a7"
                         "6d429a695160d12c923ac9cc3baca289e193548608b82801",
                         16),
               mpz_class("0606c4a02ea734cc32acd2b02bc28b99cb3e287e85a763af"
                         "267492ab572e99ab3f370d275cec1da1aaa9075ff05f79be",
                         16)};
  c.b_g1 = 4;
  c.b_g2 = Fp2{4, 4};

  return c;
}

const Ctx& ctx() {
  static const Ctx c = [] {
    Ctx base = build_ctx();
    // Frobenius coefficients: xi^{k(p-1)/6}. Computed generically; they are
    // constants of the curve.
    mpz_class step = (base.p - 1) / 6;
    Fp2 xi{1, 1};
    // f2_pow needs the context for fp_mul; bootstrap with a local pow.
    auto local_mul = [&base](const mpz_class& a, const mpz_class& b) {
      mpz_class t = a * b;
      mpz_class out;
      mpz_mod(out.get_mpz_t(), t.get_mpz_t(), base.p.get_mpz_t());
      return out;
    };
    auto local_f2_mul = [&](const Fp2& a, const Fp2& b) {
      mpz_class t0 = local_mul(a.c0, b.c0);
      mpz_class t1 = local_mul(a.c1, b.c1);
      mpz_class t2 = local_mul(a.c0 + a.c1, b.c0 + b.c1);
      mpz_class d0 = t0 - t1;
      mpz_mod(d0.get_mpz_t(), d0.get_mpz_t(), base.p.get_mpz_t());
      mpz_class d1 = t2 - t0 - t1;
      mpz_mod(d1.get_mpz_t(), d1.get_mpz_t(), base.p.get_mpz_t());
      return Fp2{d0, d1};
    };
    auto local_f2_pow = [&](Fp2 a, const mpz_class& e) {
      Fp2 out{1, 0};
      for (ssize_t i = ssize_t(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        out = local_f2_mul(out, out);
        if (mpz_tstbit(e.get_mpz_t(), mp_bitcnt_t(i))) out = local_f2_mul(out, a);
      }
      return out;
    };
    for (int k = 0; k < 6; ++k) base.frob[k] = local_f2_pow(xi, step * k);

    // Shallue-van de Woestijne constants, selected per RFC 9380 H.1 for
    // E: y^2 = x^3 + 4 (A = 0).
    auto g_of = [&](const mpz_class& x) {
      mpz_class v = x * x % base.p * x % base.p + 4;
      mpz_mod(v.get_mpz_t(), v.get_mpz_t(), base.p.get_mpz_t());
      return v;
    };
    auto mod_p = [&](mpz_class v) {
      mpz_mod(v.get_mpz_t(), v.get_mpz_t(), base.p.get_mpz_t());
      return v;
    };
    mpz_class z;
    bool found = false;
    for (int cand = 1; cand < 100 && !found; ++cand) {
      for (int sign = 0; sign < 2 && !found; ++sign) {
        mpz_class zc = mod_p(sign == 0 ? mpz_class(cand) : base.p - cand);
        mpz_class gz = g_of(zc);
        if (gz == 0) continue;
        mpz_class three_z2 = mod_p(3 * zc * zc);
        if (three_z2 == 0) continue;
        mpz_class four_gz = mod_p(4 * gz);
        mpz_class inv4gz;
        if (mpz_invert(inv4gz.get_mpz_t(), four_gz.get_mpz_t(),
                       base.p.get_mpz_t()) == 0)
          continue;
        mpz_class h = mod_p((base.p - three_z2) * inv4gz);
        if (h == 0 || !fp_is_square(h, base.p)) continue;
        mpz_class neg_z_half = mod_p((base.p - zc) * ((base.p + 1) / 2));
        if (!fp_is_square(gz, base.p) && !fp_is_square(g_of(neg_z_half), base.p))
          continue;
        z = zc;
        found = true;
      }
    }
    if (!found) throw Error("no SVDW constant found");
    base.sw_z = z;
    base.sw_c1 = g_of(z);
    base.sw_c2 = mod_p((base.p - z) * ((base.p + 1) / 2));  // -z/2
    mpz_class c3sq = mod_p((base.p - base.sw_c1) * mod_p(3 * z * z));
    mpz_class c3;
    mpz_class sqrt_e = (base.p + 1) / 4;
    mpz_powm(c3.get_mpz_t(), c3sq.get_mpz_t(), sqrt_e.get_mpz_t(),
             base.p.get_mpz_t());
    if (mod_p(c3 * c3) != c3sq) throw Error("SVDW c3 is not a square root");
    if (mpz_tstbit(c3.get_mpz_t(), 0)) c3 = base.p - c3;  // sgn0(c3) == 0
    base.sw_c3 = c3;
    mpz_class inv3z2;
    mpz_invert(inv3z2.get_mpz_t(), mpz_class(mod_p(3 * z * z)).get_mpz_t(),
               base.p.get_mpz_t());
    base.sw_c4 = mod_p((base.p - mod_p(4 * base.sw_c1)) * inv3z2);
    return base;
  }();
  return c;
}

mpz_class fp_add(const mpz_class& a, const mpz_class& b) {
  mpz_class out = a + b;
  if (out >= ctx().p) out -= ctx().p;
  return out;
}

mpz_class fp_sub(const mpz_class& a, const mpz_class& b) {
  mpz_class out = a - b;
  if (out < 0) out += ctx().p;
  return out;
}

mpz_class fp_mul(const mpz_class& a, const mpz_class& b) {
  mpz_class t = a * b;
  mpz_class out;
  mpz_mod(out.get_mpz_t(), t.get_mpz_t(), ctx().p.get_mpz_t());
  return out;
}

mpz_class fp_neg(const mpz_class& a) {
  if (a == 0) return a;
  return ctx().p - a;
}

mpz_class fp_inv(const mpz_class& a) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), ctx().p.get_mpz_t()) == 0)
    throw Error("inversion of zero in Fp");
  return out;
}

mpz_class fp_sqrt(const mpz_class& a, bool* ok) {
  mpz_class root;
  mpz_powm(root.get_mpz_t(), a.get_mpz_t(), ctx().sqrt_exp.get_mpz_t(),
           ctx().p.get_mpz_t());
  *ok = fp_mul(root, root) == a;
  return root;
}

// Square root in Fp2 for p = 3 mod 4 (complex method); *ok reports whether
// the input was a square.
Fp2 f2_sqrt(const Fp2& a, bool* ok) {
  if (f2_is_zero(a)) {
    *ok = true;
    return a;
  }
  mpz_class e = (ctx().p - 3) / 4;
  Fp2 a1 = f2_pow(a, e);
  Fp2 alpha = f2_mul(f2_sqr(a1), a);
  Fp2 x0 = f2_mul(a1, a);
  Fp2 minus_one{ctx().p - 1, 0};
  Fp2 cand;
  if (alpha == minus_one) {
    cand = Fp2{fp_neg(x0.c1), x0.c0};  // i * x0
  } else {
    Fp2 b = f2_pow(f2_add(f2_one(), alpha), ctx().p_half);
    cand = f2_mul(b, x0);
  }
  *ok = f2_sqr(cand) == a;
  return cand;
}

// ---------------------------------------------------------------------------
// Frobenius on Fp12. Coefficient k of w^k maps to conj(c_k) * xi^{k(p-1)/6}.

Fp12 f12_frobenius(const Fp12& a) {
  const Ctx& c = ctx();
  Fp12 out;
  out.c0.c0 = f2_conj(a.c0.c0);                          // w^0
  out.c1.c0 = f2_mul(f2_conj(a.c1.c0), c.frob[1]);       // w^1
  out.c0.c1 = f2_mul(f2_conj(a.c0.c1), c.frob[2]);       // w^2
  out.c1.c1 = f2_mul(f2_conj(a.c1.c1), c.frob[3]);       // w^3
  out.c0.c2 = f2_mul(f2_conj(a.c0.c2), c.frob[4]);       // w^4
  out.c1.c2 = f2_mul(f2_conj(a.c1.c2), c.frob[5]);       // w^5
  return out;
}

Fp12 f12_frobenius_n(Fp12 a, int n) {
  for (int i = 0; i < n; ++i) a = f12_frobenius(a);
  return a;
}

// ---------------------------------------------------------------------------
// Generic short-Weierstrass point arithmetic (a = 0), shared by G1 and G2.

template <typename Elem, typename Ops>
struct Jac {
  Elem x, y, z;  // z == 0 encodes infinity
};

template <typename Elem, typename Ops>
Jac<Elem, Ops> jac_double(const Jac<Elem, Ops>& pt) {
  if (Ops::is_zero(pt.z)) return pt;
  Elem a = Ops::sqr(pt.x);
  Elem b = Ops::sqr(pt.y);
  Elem cc = Ops::sqr(b);
  Elem d = Ops::sub(Ops::sub(Ops::sqr(Ops::add(pt.x, b)), a), cc);
  d = Ops::add(d, d);
  Elem e = Ops::add(Ops::add(a, a), a);
  Elem f = Ops::sqr(e);
  Jac<Elem, Ops> out;
  out.x = Ops::sub(f, Ops::add(d, d));
  Elem c8 = Ops::add(cc, cc);
  c8 = Ops::add(c8, c8);
  c8 = Ops::add(c8, c8);
  out.y = Ops::sub(Ops::mul(e, Ops::sub(d, out.x)), c8);
  Elem yz = Ops::mul(pt.y, pt.z);
  out.z = Ops::add(yz, yz);
  return out;
}

// Mixed addition with an affine point (never the identity).
template <typename Elem, typename Ops>
Jac<Elem, Ops> jac_add_affine(const Jac<Elem, Ops>& pt, const Elem& qx,
                              const Elem& qy) {
  if (Ops::is_zero(pt.z)) return Jac<Elem, Ops>{qx, qy, Ops::one()};
  Elem z1z1 = Ops::sqr(pt.z);
  Elem u2 = Ops::mul(qx, z1z1);
  Elem s2 = Ops::mul(Ops::mul(qy, pt.z), z1z1);
  Elem h = Ops::sub(u2, pt.x);
  Elem rr = Ops::sub(s2, pt.y);
  if (Ops::is_zero(h)) {
    if (Ops::is_zero(rr)) return jac_double(pt);
    return Jac<Elem, Ops>{Ops::one(), Ops::one(), Ops::zero()};
  }
  Elem hh = Ops::sqr(h);
  Elem i = Ops::add(hh, hh);
  i = Ops::add(i, i);
  Elem j = Ops::mul(h, i);
  rr = Ops::add(rr, rr);
  Elem v = Ops::mul(pt.x, i);
  Jac<Elem, Ops> out;
  out.x = Ops::sub(Ops::sub(Ops::sqr(rr), j), Ops::add(v, v));
  Elem yj = Ops::mul(pt.y, j);
  out.y = Ops::sub(Ops::mul(rr, Ops::sub(v, out.x)), Ops::add(yj, yj));
  out.z = Ops::sub(Ops::sub(Ops::sqr(Ops::add(pt.z, h)), z1z1), hh);
  return out;
}

struct FpOps {
  using Elem = mpz_class;
  static Elem add(const Elem& a, const Elem& b) { return fp_add(a, b); }
  static Elem sub(const Elem& a, const Elem& b) { return fp_sub(a, b); }
  static Elem mul(const Elem& a, const Elem& b) { return fp_mul(a, b); }
  static Elem sqr(const Elem& a) { return fp_mul(a, a); }
  static Elem neg(const Elem& a) { return fp_neg(a); }
  static Elem inv(const Elem& a) { return fp_inv(a); }
  static bool is_zero(const Elem& a) { return a == 0; }
  static Elem zero() { return 0; }
  static Elem one() { return 1; }
};

struct Fp2Ops {
  using Elem = Fp2;
  static Elem add(const Elem& a, const Elem& b) { return f2_add(a, b); }
  static Elem sub(const Elem& a, const Elem& b) { return f2_sub(a, b); }
  static Elem mul(const Elem& a, const Elem& b) { return f2_mul(a, b); }
  static Elem sqr(const Elem& a) { return f2_sqr(a); }
  static Elem neg(const Elem& a) { return f2_neg(a); }
  static Elem inv(const Elem& a) { return f2_inv(a); }
  static bool is_zero(const Elem& a) { return f2_is_zero(a); }
  static Elem zero() { return f2_zero(); }
  static Elem one() { return f2_one(); }
};

template <typename Point, typename Ops>
Point generic_add(const Point& a, const Point& b) {
  using Elem = typename Ops::Elem;
  if (a.infinity) return b;
  if (b.infinity) return a;
  if (a.x == b.x) {
    if (!(a.y == b.y)) return Point{};  // opposite points
    // doubling: m = 3x^2 / 2y
    Elem m = Ops::mul(Ops::mul(Ops::sqr(a.x), Elem(Ops::add(Ops::add(Ops::one(), Ops::one()), Ops::one()))),
                      Ops::inv(Ops::add(a.y, a.y)));
    Elem x3 = Ops::sub(Ops::sqr(m), Ops::add(a.x, a.x));
    Elem y3 = Ops::sub(Ops::mul(m, Ops::sub(a.x, x3)), a.y);
    Point out;
    out.x = x3;
    out.y = y3;
    out.infinity = false;
    return out;
  }
  Elem m = Ops::mul(Ops::sub(b.y, a.y), Ops::inv(Ops::sub(b.x, a.x)));
  Elem x3 = Ops::sub(Ops::sub(Ops::sqr(m), a.x), b.x);
  Elem y3 = Ops::sub(Ops::mul(m, Ops::sub(a.x, x3)), a.y);
  Point out;
  out.x = x3;
  out.y = y3;
  out.infinity = false;
  return out;
}

template <typename Point, typename Ops>
Point generic_mul(const Point& base, const mpz_class& scalar) {
  using Elem = typename Ops::Elem;
  mpz_class k = scalar % group_order();
  if (k < 0) k += group_order();
  if (k == 0 || base.infinity) return Point{};
  Jac<Elem, Ops> acc{Ops::one(), Ops::one(), Ops::zero()};
  for (ssize_t i = ssize_t(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
    acc = jac_double(acc);
    if (mpz_tstbit(k.get_mpz_t(), mp_bitcnt_t(i)))
      acc = jac_add_affine(acc, base.x, base.y);
  }
  if (Ops::is_zero(acc.z)) return Point{};
  Elem zinv = Ops::inv(acc.z);
  Elem zinv2 = Ops::sqr(zinv);
  Point out;
  out.x = Ops::mul(acc.x, zinv2);
  out.y = Ops::mul(acc.y, Ops::mul(zinv2, zinv));
  out.infinity = false;
  return out;
}

// ---------------------------------------------------------------------------
// Miller loop (optimal ate) with affine G2 coordinates. Lines are scaled by
// w^3, which lies in a proper subfield and is erased by the final
// exponentiation.

Fp12 line_value(const Fp2& slope, const Fp2& tx, const Fp2& ty, const G1& p) {
  Fp12 out;
  out.c0.c0 = f2_sub(f2_mul(slope, tx), ty);          // w^0
  out.c0.c1 = f2_mul_fp(f2_neg(slope), p.x);          // w^2
  out.c1.c1 = Fp2{p.y, 0};                            // w^3
  out.c0.c2 = f2_zero();
  out.c1.c0 = f2_zero();
  out.c1.c2 = f2_zero();
  return out;
}

Fp12 miller_loop(const G1& p, const G2& q) {
  if (p.infinity || q.infinity) return f12_one();
  Fp2 tx = q.x, ty = q.y;
  Fp12 f = f12_one();
  uint64_t u = ctx().abs_u;
  for (int i = 62; i >= 0; --i) {
    f = f12_sqr(f);
    // tangent at T
    Fp2 slope = f2_mul(f2_mul_fp(f2_sqr(tx), 3), f2_inv(f2_add(ty, ty)));
    f = f12_mul(f, line_value(slope, tx, ty, p));
    Fp2 x3 = f2_sub(f2_sqr(slope), f2_add(tx, tx));
    Fp2 y3 = f2_sub(f2_mul(slope, f2_sub(tx, x3)), ty);
    tx = x3;
    ty = y3;
    if ((u >> i) & 1) {
      // chord through T and Q
      Fp2 slope2 = f2_mul(f2_sub(ty, q.y), f2_inv(f2_sub(tx, q.x)));
      f = f12_mul(f, line_value(slope2, q.x, q.y, p));
      Fp2 x4 = f2_sub(f2_sub(f2_sqr(slope2), tx), q.x);
      Fp2 y4 = f2_sub(f2_mul(slope2, f2_sub(q.x, x4)), q.y);
      tx = x4;
      ty = y4;
    }
  }
  // u is negative
  return f12_conj(f);
}

Fp12 cyclo_pow_abs_u(const Fp12& a, bool plus_one) {
  uint64_t e = ctx().abs_u + (plus_one ? 1 : 0);
  return f12_pow_u64(a, e);
}

// f^x for the (negative) BLS parameter x, valid on unitary elements.
Fp12 cyclo_pow_x(const Fp12& a) { return f12_conj(cyclo_pow_abs_u(a, false)); }
// f^(x-1): |x - 1| = |x| + 1.
Fp12 cyclo_pow_xm1(const Fp12& a) { return f12_conj(cyclo_pow_abs_u(a, true)); }

Fp12 final_exponentiation(const Fp12& f) {
  // Easy part: f^((p^6 - 1)(p^2 + 1)).
  Fp12 t = f12_mul(f12_conj(f), f12_inv(f));
  t = f12_mul(f12_frobenius_n(t, 2), t);
  // Hard part: exponent 3(p^4 - p^2 + 1)/r = (x-1)^2 (x+p)(x^2+p^2-1) + 3.
  Fp12 g = cyclo_pow_xm1(cyclo_pow_xm1(t));
  Fp12 h = f12_mul(cyclo_pow_x(g), f12_frobenius(g));
  Fp12 k = f12_mul(f12_mul(cyclo_pow_x(cyclo_pow_x(h)), f12_frobenius_n(h, 2)),
                   f12_conj(h));
  return f12_mul(k, f12_mul(f12_sqr(t), t));
}

// ---------------------------------------------------------------------------
// Serialization helpers (zcash-style compressed encoding).

constexpr uint8_t kFlagCompressed = 0x80;
constexpr uint8_t kFlagInfinity = 0x40;
constexpr uint8_t kFlagSign = 0x20;

bool fp_lex_largest(const mpz_class& y) { return y > ctx().p_half; }

bool f2_lex_largest(const Fp2& y) {
  Fp2 neg = f2_neg(y);
  if (y.c1 != neg.c1) return y.c1 > neg.c1;
  return y.c0 > neg.c0;
}

void put_fp(Bytes& out, const mpz_class& v) {
  Bytes raw = mpz_to_be(v, 48);
  out.insert(out.end(), raw.begin(), raw.end());
}

mpz_class read_fp(std::span<const uint8_t> raw, uint8_t mask_first) {
  Bytes tmp(raw.begin(), raw.end());
  tmp[0] &= uint8_t(~mask_first);
  mpz_class v = mpz_from_be(tmp);
  if (v >= ctx().p) throw Error("field element out of range");
  return v;
}

// ---------------------------------------------------------------------------
// expand_message_xmd with SHA-256 (RFC 9380 section 5.3.1).

Bytes expand_message_xmd(std::span<const uint8_t> msg, const std::string& dst,
                         size_t len_in_bytes) {
  constexpr size_t kHashLen = 32;
  constexpr size_t kBlockLen = 64;
  size_t ell = (len_in_bytes + kHashLen - 1) / kHashLen;
  if (ell > 255 || dst.size() > 255) throw Error("expand_message_xmd bounds");

  Bytes dst_prime(dst.begin(), dst.end());
  dst_prime.push_back(uint8_t(dst.size()));

  crypto_hash_sha256_state st;
  Bytes b0(kHashLen);
  {
    Bytes zpad(kBlockLen, 0);
    crypto_hash_sha256_init(&st);
    crypto_hash_sha256_update(&st, zpad.data(), zpad.size());
    crypto_hash_sha256_update(&st, msg.data(), msg.size());
    uint8_t lib[2] = {uint8_t(len_in_bytes >> 8), uint8_t(len_in_bytes)};
    crypto_hash_sha256_update(&st, lib, 2);
    uint8_t zero = 0;
    crypto_hash_sha256_update(&st, &zero, 1);
    crypto_hash_sha256_update(&st, dst_prime.data(), dst_prime.size());
    crypto_hash_sha256_final(&st, b0.data());
  }

  Bytes out;
  Bytes bi(kHashLen);
  for (uint8_t i = 1; i <= ell; ++i) {
    Bytes input;
    if (i == 1) {
      input = b0;
    } else {
      input.resize(kHashLen);
      for (size_t j = 0; j < kHashLen; ++j) input[j] = b0[j] ^ bi[j];
    }
    crypto_hash_sha256_init(&st);
    crypto_hash_sha256_update(&st, input.data(), input.size());
    crypto_hash_sha256_update(&st, &i, 1);
    crypto_hash_sha256_update(&st, dst_prime.data(), dst_prime.size());
    crypto_hash_sha256_final(&st, bi.data());
    out.insert(out.end(), bi.begin(), bi.end());
  }
  out.resize(len_in_bytes);
  return out;
}

// Shallue-van de Woestijne map to E: y^2 = x^3 + 4 (RFC 9380 section 6.6.1).
G1 map_to_curve_svdw(const mpz_class& u) {
  const Ctx& c = ctx();
  auto inv0 = [](const mpz_class& a) {
    if (a == 0) return mpz_class(0);
    return fp_inv(a);
  };
  auto g_of = [](const mpz_class& x) {
    return fp_add(fp_mul(fp_mul(x, x), x), 4);
  };
  mpz_class tv1 = fp_mul(fp_mul(u, u), c.sw_c1);
  mpz_class tv2 = fp_add(1, tv1);
  tv1 = fp_sub(1, tv1);
  mpz_class tv3 = inv0(fp_mul(tv1, tv2));
  mpz_class tv4 = fp_mul(fp_mul(fp_mul(u, tv1), tv3), c.sw_c3);
  mpz_class x1 = fp_sub(c.sw_c2, tv4);
  mpz_class gx1 = g_of(x1);
  bool e1 = fp_is_square(gx1, c.p);
  mpz_class x2 = fp_add(c.sw_c2, tv4);
  mpz_class gx2 = g_of(x2);
  bool e2 = fp_is_square(gx2, c.p) && !e1;
  mpz_class x3 = fp_mul(fp_mul(tv2, tv2), tv3);
  x3 = fp_add(fp_mul(fp_mul(x3, x3), c.sw_c4), c.sw_z);
  mpz_class x = e1 ? x1 : (e2 ? x2 : x3);
  mpz_class gx = g_of(x);
  bool ok = false;
  mpz_class y = fp_sqrt(gx, &ok);
  if (!ok) throw Error("SVDW produced a non-square");
  bool u_sign = mpz_tstbit(u.get_mpz_t(), 0);
  bool y_sign = mpz_tstbit(y.get_mpz_t(), 0);
  if (u_sign != y_sign) y = fp_neg(y);
  G1 out;
  out.x = x;
  out.y = y;
  out.infinity = false;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface

const mpz_class& field_modulus() { return ctx().p; }
const mpz_class& group_order() { return ctx().r; }

mpz_class random_scalar(Rng& rng) { return rng.below(group_order()); }

mpz_class random_nonzero_scalar(Rng& rng) {
  while (true) {
    mpz_class s = random_scalar(rng);
    if (s != 0) return s;
  }
}

mpz_class scalar_inverse(const mpz_class& s) {
  mpz_class out;
  mpz_class v = s % group_order();
  if (v < 0) v += group_order();
  if (mpz_invert(out.get_mpz_t(), v.get_mpz_t(), group_order().get_mpz_t()) == 0)
    throw Error("scalar has no inverse mod r");
  return out;
}

G1 G1::generator() {
  G1 g;
  g.x = ctx().g1_x;
  g.y = ctx().g1_y;
  g.infinity = false;
  return g;
}

bool G1::is_on_curve() const {
  if (infinity) return true;
  return fp_mul(y, y) == fp_add(fp_mul(fp_mul(x, x), x), ctx().b_g1);
}

G1 G1::add(const G1& other) const { return generic_add<G1, FpOps>(*this, other); }

G1 G1::neg() const {
  if (infinity) return *this;
  G1 out = *this;
  out.y = fp_neg(y);
  return out;
}

G1 G1::mul(const mpz_class& scalar) const {
  return generic_mul<G1, FpOps>(*this, scalar);
}

Bytes G1::serialize() const {
  Bytes out;
  if (infinity) {
    out.assign(kSerializedSize, 0);
    out[0] = kFlagCompressed | kFlagInfinity;
    return out;
  }
  put_fp(out, x);
  out[0] |= kFlagCompressed;
  if (fp_lex_largest(y)) out[0] |= kFlagSign;
  return out;
}

G1 G1::deserialize(std::span<const uint8_t> raw) {
  if (raw.size() != kSerializedSize) throw Error("bad G1 encoding length");
  uint8_t flags = raw[0];
  if (!(flags & kFlagCompressed)) throw Error("expected compressed G1 point");
  if (flags & kFlagInfinity) {
    for (size_t i = 0; i < raw.size(); ++i)
      if ((i == 0 ? uint8_t(raw[i] & 0x3f) : raw[i]) != 0)
        throw Error("malformed G1 infinity encoding");
    return G1{};
  }
  G1 out;
  out.x = read_fp(raw.subspan(0, 48), 0xe0);
  bool ok = false;
  mpz_class y = fp_sqrt(fp_add(fp_mul(fp_mul(out.x, out.x), out.x), ctx().b_g1), &ok);
  if (!ok) throw Error("G1 x-coordinate is not on the curve");
  bool want_largest = (flags & kFlagSign) != 0;
  if (fp_lex_largest(y) != want_largest) y = fp_neg(y);
  out.y = y;
  out.infinity = false;
  return out;
}

G2 G2::generator() {
  G2 g;
  g.x = ctx().g2_x;
  g.y = ctx().g2_y;
  g.infinity = false;
  return g;
}

bool G2::is_on_curve() const {
  if (infinity) return true;
  return f2_sqr(y) == f2_add(f2_mul(f2_sqr(x), x), ctx().b_g2);
}

G2 G2::add(const G2& other) const { return generic_add<G2, Fp2Ops>(*this, other); }

G2 G2::neg() const {
  if (infinity) return *this;
  G2 out = *this;
  out.y = f2_neg(y);
  return out;
}

G2 G2::mul(const mpz_class& scalar) const {
  return generic_mul<G2, Fp2Ops>(*this, scalar);
}

Bytes G2::serialize() const {
  Bytes out;
  if (infinity) {
    out.assign(kSerializedSize, 0);
    out[0] = kFlagCompressed | kFlagInfinity;
    return out;
  }
  put_fp(out, x.c1);
  put_fp(out, x.c0);
  out[0] |= kFlagCompressed;
  if (f2_lex_largest(y)) out[0] |= kFlagSign;
  return out;
}

G2 G2::deserialize(std::span<const uint8_t> raw) {
  if (raw.size() != kSerializedSize) throw Error("bad G2 encoding length");
  uint8_t flags = raw[0];
  if (!(flags & kFlagCompressed)) throw Error("expected compressed G2 point");
  if (flags & kFlagInfinity) {
    for (size_t i = 0; i < raw.size(); ++i)
      if ((i == 0 ? uint8_t(raw[i] & 0x3f) : raw[i]) != 0)
        throw Error("malformed G2 infinity encoding");
    return G2{};
  }
  G2 out;
  out.x.c1 = read_fp(raw.subspan(0, 48), 0xe0);
  out.x.c0 = read_fp(raw.subspan(48, 48), 0x00);
  bool ok = false;
  Fp2 y = f2_sqrt(f2_add(f2_mul(f2_sqr(out.x), out.x), ctx().b_g2), &ok);
  if (!ok) throw Error("G2 x-coordinate is not on the curve");
  bool want_largest = (flags & kFlagSign) != 0;
  if (f2_lex_largest(y) != want_largest) y = f2_neg(y);
  out.y = y;
  out.infinity = false;
  return out;
}

Gt Gt::one() { return Gt{f12_one()}; }

Gt Gt::mul(const Gt& other) const { return Gt{f12_mul(v, other.v)}; }

Gt Gt::inverse() const { return Gt{f12_conj(v)}; }

Gt Gt::pow(const mpz_class& scalar) const {
  mpz_class k = scalar % group_order();
  if (k < 0) k += group_order();
  Gt out = one();
  for (ssize_t i = ssize_t(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
    out.v = f12_sqr(out.v);
    if (mpz_tstbit(k.get_mpz_t(), mp_bitcnt_t(i))) out.v = f12_mul(out.v, v);
  }
  if (k == 0) return one();
  return out;
}

bool Gt::is_one() const { return f12_is_one(v); }

Bytes Gt::serialize() const {
  Bytes out;
  const Fp2* coeffs[6] = {&v.c0.c0, &v.c0.c1, &v.c0.c2,
                          &v.c1.c0, &v.c1.c1, &v.c1.c2};
  for (const Fp2* f : coeffs) {
    put_fp(out, f->c0);
    put_fp(out, f->c1);
  }
  return out;
}

Gt Gt::deserialize(std::span<const uint8_t> raw) {
  if (raw.size() != kSerializedSize) throw Error("bad Gt encoding length");
  Gt out;
  Fp2* coeffs[6] = {&out.v.c0.c0, &out.v.c0.c1, &out.v.c0.c2,
                    &out.v.c1.c0, &out.v.c1.c1, &out.v.c1.c2};
  size_t off = 0;
  for (Fp2* f : coeffs) {
    f->c0 = read_fp(raw.subspan(off, 48), 0);
    f->c1 = read_fp(raw.subspan(off + 48, 48), 0);
    off += 96;
  }
  // Pairing outputs are unitary; reject anything else.
  if (!f12_is_one(f12_mul(out.v, f12_conj(out.v))))
    throw Error("Gt element is not unitary");
  return out;
}

Gt pairing(const G1& p, const G2& q) {
  return Gt{final_exponentiation(miller_loop(p, q))};
}

Gt pairing_product(std::span<const std::pair<G1, G2>> pairs) {
  Fp12 acc = f12_one();
  for (const auto& [p, q] : pairs) acc = f12_mul(acc, miller_loop(p, q));
  return Gt{final_exponentiation(acc)};
}

G1 hash_to_g1(std::span<const uint8_t> msg, const std::string& dst) {
  Bytes uniform = expand_message_xmd(msg, dst, 128);
  mpz_class u0 = mpz_from_be(std::span(uniform).subspan(0, 64)) % ctx().p;
  mpz_class u1 = mpz_from_be(std::span(uniform).subspan(64, 64)) % ctx().p;
  G1 q0 = map_to_curve_svdw(u0);
  G1 q1 = map_to_curve_svdw(u1);
  return q0.add(q1).mul(ctx().h_eff_g1);
}

}  // namespace plqp::bls
