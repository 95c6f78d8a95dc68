#include "p2pagg/sharing.hpp"

#include <algorithm>
#include <unordered_set>

#include "p2pagg/bytes.hpp"
#include "p2pagg/errors.hpp"

namespace p2pagg {

void serialize_share(const Share& s, std::vector<uint8_t>& out) {
  append_le16(out, s.party_id);
  append_le16(out, s.degree);
  append_le64(out, s.value.v);
}

Share parse_share(std::span<const uint8_t> in, size_t offset) {
  if (offset + kShareWireBytes > in.size()) throw IoError("short share buffer");
  Share s;
  s.party_id = load_le16(in.data() + offset);
  s.degree = load_le16(in.data() + offset + 2);
  s.value.v = load_le64(in.data() + offset + 4);
  if (s.value.v >= kFieldPrime) throw IoError("share value out of field range");
  return s;
}

FieldElement eval_poly(std::span<const FieldElement> coeffs, FieldElement x) {
  FieldElement acc = fe(0);
  for (size_t i = coeffs.size(); i-- > 0;) acc = add(mul(acc, x), coeffs[i]);
  return acc;
}

std::vector<Share> shares_from_coeffs(std::span<const FieldElement> coeffs,
                                      int n, int degree_tag) {
  check(n >= 1 && n < 65536, "party count out of range");
  check(degree_tag >= 0 && degree_tag < n, "degree tag out of range");
  std::vector<Share> out(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) {
    out[static_cast<size_t>(i - 1)] = Share{
        static_cast<uint16_t>(i), static_cast<uint16_t>(degree_tag),
        eval_poly(coeffs, fe(static_cast<uint64_t>(i)))};
  }
  return out;
}

std::vector<Share> share_secret(FieldElement secret, const SharingParams& p,
                                SeededRng& rng) {
  check(p.t >= 1 && p.t < p.n, "threshold out of range");
  std::vector<FieldElement> coeffs(static_cast<size_t>(p.t) + 1);
  coeffs[0] = secret;
  for (int k = 1; k <= p.t; ++k)
    coeffs[static_cast<size_t>(k)] = rng.field_uniform();
  return shares_from_coeffs(coeffs, p.n, p.t);
}

namespace {

void require_distinct_points(std::span<const Share> shares, int degree) {
  std::unordered_set<uint16_t> seen;
  for (const Share& s : shares) {
    if (s.party_id == 0) throw Error("share at x=0 is the secret itself");
    if (s.degree != degree) throw DegreeMismatch("share degree tag mismatch");
    if (!seen.insert(s.party_id).second)
      throw Error("duplicate party id among shares");
  }
}

// l_i(at) over the base points xs, i.e. the weight of y_i when evaluating
// the interpolated polynomial at `at`.
FieldElement lagrange_weight_at(std::span<const uint16_t> xs, size_t i,
                                FieldElement at) {
  FieldElement num = fe(1), den = fe(1);
  FieldElement xi = fe(xs[i]);
  for (size_t j = 0; j < xs.size(); ++j) {
    if (j == i) continue;
    FieldElement xj = fe(xs[j]);
    num = mul(num, sub(at, xj));
    den = mul(den, sub(xi, xj));
  }
  return mul(num, inv(den));
}

}  // namespace

std::vector<FieldElement> lagrange_at_zero(std::span<const uint16_t> xs) {
  // lambda_i = prod_{j != i} x_j / (x_j - x_i)
  std::vector<FieldElement> lambda(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    FieldElement num = fe(1), den = fe(1);
    FieldElement xi = fe(xs[i]);
    for (size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      FieldElement xj = fe(xs[j]);
      num = mul(num, xj);
      den = mul(den, sub(xj, xi));
    }
    lambda[i] = mul(num, inv(den));
  }
  return lambda;
}

FieldElement reconstruct_checked(std::span<const Share> shares, int degree) {
  const size_t need = static_cast<size_t>(degree) + 1;
  if (shares.size() < need) throw InsufficientShares("insufficient shares");
  require_distinct_points(shares, degree);

  std::vector<uint16_t> base(need);
  for (size_t i = 0; i < need; ++i) base[i] = shares[i].party_id;

  std::vector<FieldElement> lambda = lagrange_at_zero(base);
  FieldElement f0 = fe(0);
  for (size_t i = 0; i < need; ++i)
    f0 = add(f0, mul(lambda[i], shares[i].value));

  for (size_t e = need; e < shares.size(); ++e) {
    FieldElement pred = fe(0);
    for (size_t i = 0; i < need; ++i) {
      FieldElement w = lagrange_weight_at(base, i, fe(shares[e].party_id));
      pred = add(pred, mul(w, shares[i].value));
    }
    if (pred != shares[e].value)
      throw InconsistentSharing("inconsistent sharing");
  }
  return f0;
}

namespace {

// Row-reduce the augmented system A x = b (b stored as the last column) and
// return one solution with free variables set to zero. The caller verifies
// the solution against the original equations.
std::vector<FieldElement> solve_linear(std::vector<std::vector<FieldElement>>& a,
                                       size_t unknowns) {
  const size_t rows = a.size();
  std::vector<size_t> pivot_row_of_col(unknowns, SIZE_MAX);
  size_t r = 0;
  for (size_t c = 0; c < unknowns && r < rows; ++c) {
    size_t piv = SIZE_MAX;
    for (size_t i = r; i < rows; ++i) {
      if (a[i][c].v != 0) {
        piv = i;
        break;
      }
    }
    if (piv == SIZE_MAX) continue;
    std::swap(a[r], a[piv]);
    FieldElement s = inv(a[r][c]);
    for (size_t j = c; j <= unknowns; ++j) a[r][j] = mul(a[r][j], s);
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c].v == 0) continue;
      FieldElement f = a[i][c];
      for (size_t j = c; j <= unknowns; ++j)
        a[i][j] = sub(a[i][j], mul(f, a[r][j]));
    }
    pivot_row_of_col[c] = r;
    ++r;
  }
  // Any remaining nonzero row with zero coefficients means no solution.
  for (size_t i = r; i < rows; ++i) {
    if (a[i][unknowns].v != 0) throw Undecodable("errors exceed correction capacity");
  }
  std::vector<FieldElement> x(unknowns, fe(0));
  for (size_t c = 0; c < unknowns; ++c) {
    if (pivot_row_of_col[c] != SIZE_MAX) x[c] = a[pivot_row_of_col[c]][unknowns];
  }
  return x;
}

// q / e with e monic of degree e_deg; throws if the remainder is nonzero.
std::vector<FieldElement> divide_exact(std::vector<FieldElement> q,
                                       std::span<const FieldElement> e) {
  const size_t e_deg = e.size() - 1;
  check(e[e_deg].v == 1, "divisor must be monic");
  if (q.size() < e.size()) {
    for (const FieldElement& c : q)
      if (c.v != 0) throw Undecodable("errors exceed correction capacity");
    return {fe(0)};
  }
  std::vector<FieldElement> quot(q.size() - e_deg, fe(0));
  for (size_t k = q.size(); k-- > e.size() - 1;) {
    if (k < e_deg) break;
    FieldElement coef = q[k];
    if (coef.v == 0) continue;
    quot[k - e_deg] = coef;
    for (size_t j = 0; j < e.size(); ++j)
      q[k - e_deg + j] = sub(q[k - e_deg + j], mul(coef, e[j]));
  }
  for (const FieldElement& c : q)
    if (c.v != 0) throw Undecodable("errors exceed correction capacity");
  return quot;
}

}  // namespace

FieldElement reconstruct_corrected(std::span<const Share> shares, int degree,
                                   int max_errors) {
  check(max_errors >= 0, "negative error budget");
  const size_t need =
      static_cast<size_t>(degree) + 2 * static_cast<size_t>(max_errors) + 1;
  if (shares.size() < need) throw InsufficientShares("insufficient shares");
  require_distinct_points(shares, degree);

  if (max_errors == 0) {
    try {
      return reconstruct_checked(shares, degree);
    } catch (const InconsistentSharing&) {
      throw Undecodable("errors exceed correction capacity");
    }
  }

  // Berlekamp-Welch: find E (monic, degree e) and Q (degree d+e) with
  // Q(x_i) = y_i E(x_i) for all i; then f = Q / E.
  const size_t e_deg = static_cast<size_t>(max_errors);
  const size_t q_len = static_cast<size_t>(degree) + e_deg + 1;
  const size_t unknowns = q_len + e_deg;  // Q coeffs, then E_0..E_{e-1}
  const size_t rows = shares.size();

  std::vector<std::vector<FieldElement>> a(
      rows, std::vector<FieldElement>(unknowns + 1, fe(0)));
  for (size_t i = 0; i < rows; ++i) {
    FieldElement x = fe(shares[i].party_id);
    FieldElement y = shares[i].value;
    FieldElement xp = fe(1);
    for (size_t j = 0; j < q_len; ++j) {
      a[i][j] = xp;
      xp = mul(xp, x);
    }
    xp = fe(1);
    for (size_t j = 0; j < e_deg; ++j) {
      a[i][q_len + j] = neg(mul(y, xp));
      xp = mul(xp, x);
    }
    a[i][unknowns] = mul(y, xp);  // y * x^e
  }

  std::vector<FieldElement> sol = solve_linear(a, unknowns);

  std::vector<FieldElement> q_poly(sol.begin(),
                                   sol.begin() + static_cast<long>(q_len));
  std::vector<FieldElement> e_poly(e_deg + 1);
  for (size_t j = 0; j < e_deg; ++j) e_poly[j] = sol[q_len + j];
  e_poly[e_deg] = fe(1);

  // Verify the (possibly free-variable-completed) solution really satisfies
  // every interpolation constraint before dividing.
  for (const Share& s : shares) {
    FieldElement x = fe(s.party_id);
    FieldElement lhs = eval_poly(q_poly, x);
    FieldElement rhs = mul(s.value, eval_poly(e_poly, x));
    if (lhs != rhs) throw Undecodable("errors exceed correction capacity");
  }

  std::vector<FieldElement> f = divide_exact(std::move(q_poly), e_poly);
  if (f.size() > static_cast<size_t>(degree) + 1) {
    for (size_t j = static_cast<size_t>(degree) + 1; j < f.size(); ++j)
      if (f[j].v != 0) throw Undecodable("errors exceed correction capacity");
    f.resize(static_cast<size_t>(degree) + 1);
  }

  size_t disagreements = 0;
  for (const Share& s : shares) {
    if (eval_poly(f, fe(s.party_id)) != s.value) ++disagreements;
  }
  if (disagreements > e_deg)
    throw Undecodable("errors exceed correction capacity");
  return f.empty() ? fe(0) : f[0];
}

Share add_shares(Share a, Share b) {
  if (a.party_id != b.party_id) throw Error("share party mismatch");
  if (a.degree != b.degree) throw DegreeMismatch("share degree mismatch");
  a.value = add(a.value, b.value);
  return a;
}

Share sub_shares(Share a, Share b) {
  if (a.party_id != b.party_id) throw Error("share party mismatch");
  if (a.degree != b.degree) throw DegreeMismatch("share degree mismatch");
  a.value = sub(a.value, b.value);
  return a;
}

Share scale_share(FieldElement c, Share a) {
  a.value = mul(c, a.value);
  return a;
}

Share add_public(Share a, FieldElement c) {
  // Adding a constant to f(0) adds it to every evaluation.
  a.value = add(a.value, c);
  return a;
}

Share mul_local(Share a, Share b, const SharingParams& p) {
  if (a.party_id != b.party_id) throw Error("share party mismatch");
  int d = static_cast<int>(a.degree) + static_cast<int>(b.degree);
  if (d > p.n - 1)
    throw DegreeMismatch("product degree exceeds reconstructible range");
  a.degree = static_cast<uint16_t>(d);
  a.value = mul(a.value, b.value);
  return a;
}

Share lift_degree(Share a, int degree) {
  check(degree >= a.degree && degree < 65536, "cannot lower a degree tag");
  a.degree = static_cast<uint16_t>(degree);
  return a;
}

}  // namespace p2pagg
