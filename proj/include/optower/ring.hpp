/* Coefficient rings: Q, F_p, Z. All scalars are GMP rationals; prime-field
 * values are kept as reduced residues with denominator 1, integer values as
 * rationals with denominator 1. Every arithmetic helper takes the ring so the
 * invariants are re-established after each operation. */
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ot {

using Q = mpq_class;

struct Error : std::runtime_error {
    std::string code;
    Error(std::string c, const std::string& msg)
        : std::runtime_error("[" + c + "] " + msg), code(std::move(c)) {}
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
    throw Error(code, msg);
}

#define OT_CHECK(cond, code, msg) \
    do { if (!(cond)) ::ot::fail(code, msg); } while (0)

enum class RingKind { Q, Zp, Z };

struct Ring {
    RingKind kind = RingKind::Q;
    long p = 0;  // modulus when kind == Zp

    bool isField() const { return kind != RingKind::Z; }

    Q norm(const Q& v) const {
        switch (kind) {
            case RingKind::Q: return v;
            case RingKind::Z:
                OT_CHECK(v.get_den() == 1, "wrong-ring", "non-integer value over Z: " + v.get_str());
                return v;
            case RingKind::Zp: {
                OT_CHECK(p > 1, "wrong-ring", "prime field without modulus");
                mpz_class den = v.get_den(), num = v.get_num(), inv;
                if (den != 1) {
                    OT_CHECK(mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), mpz_class(p).get_mpz_t()),
                             "wrong-ring", "denominator not invertible mod p");
                    num *= inv;
                }
                mpz_class r = num % p;
                if (r < 0) r += p;
                return Q(r);
            }
        }
        return v;
    }

    Q add(const Q& a, const Q& b) const { return norm(a + b); }
    Q sub(const Q& a, const Q& b) const { return norm(a - b); }
    Q mul(const Q& a, const Q& b) const { return norm(a * b); }
    Q neg(const Q& a) const { return norm(-a); }

    bool isUnit(const Q& a) const {
        if (a == 0) return false;
        if (kind == RingKind::Z) return a == 1 || a == -1;
        return true;
    }

    Q inv(const Q& a) const {
        OT_CHECK(a != 0, "internal", "division by zero");
        if (kind == RingKind::Z) {
            OT_CHECK(isUnit(a), "wrong-ring", "inverse of a non-unit over Z");
            return a;
        }
        if (kind == RingKind::Q) {
            Q r;
            mpq_inv(r.get_mpq_t(), a.get_mpq_t());
            return r;
        }
        mpz_class inv;
        mpz_class num = norm(a).get_num();
        OT_CHECK(mpz_invert(inv.get_mpz_t(), num.get_mpz_t(), mpz_class(p).get_mpz_t()),
                 "wrong-ring", "value not invertible mod p");
        return Q(inv);
    }

    Q div(const Q& a, const Q& b) const { return mul(a, inv(b)); }

    std::string str() const {
        switch (kind) {
            case RingKind::Q: return "Q";
            case RingKind::Z: return "Z";
            case RingKind::Zp: return "F" + std::to_string(p);
        }
        return "?";
    }

    static Ring parse(const std::string& s) {
        if (s == "Q") return {RingKind::Q, 0};
        if (s == "Z") return {RingKind::Z, 0};
        if (s.size() > 1 && s[0] == 'F') {
            long q = std::stol(s.substr(1));
            OT_CHECK(q > 1, "wrong-ring", "bad modulus in ring name: " + s);
            return {RingKind::Zp, q};
        }
        fail("wrong-ring", "unknown ring name: " + s);
    }

    bool operator==(const Ring& o) const { return kind == o.kind && p == o.p; }
    bool operator!=(const Ring& o) const { return !(*this == o); }
};

inline Ring ringQ() { return {RingKind::Q, 0}; }
inline Ring ringZ() { return {RingKind::Z, 0}; }
inline Ring ringFp(long p) { return {RingKind::Zp, p}; }

inline Q parseScalar(const std::string& s) {
    Q v;
    OT_CHECK(v.set_str(s, 10) == 0, "parse", "bad scalar literal: " + s);
    v.canonicalize();
    return v;
}

inline std::string scalarStr(const Q& v) { return v.get_str(); }

}  // namespace ot
