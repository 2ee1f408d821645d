#include "optower/chain.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace ot {

void ChainComplex::validate() const {
    for (auto& [n, m] : d) {
        OT_CHECK(m.rows == dim(n - 1) && m.cols == dim(n), "bad-input",
                 "differential at degree " + std::to_string(n) + " has wrong shape");
        if (ring.kind == RingKind::Z) {
            for (auto& col : m.c)
                for (auto& [r, v] : col) {
                    (void)r;
                    OT_CHECK(v.get_den() == 1, "wrong-ring", "non-integer entry in Z complex");
                }
        }
        if (ring.kind == RingKind::Zp) {
            for (auto& col : m.c)
                for (auto& [r, v] : col) {
                    (void)r;
                    OT_CHECK(v == ring.norm(v), "wrong-ring", "entry not reduced mod p");
                }
        }
    }
    for (auto& [n, m] : d) {
        if (dim(n - 2) == 0) continue;
        Mat sq = dmat(n - 1).mul(m, ring);
        OT_CHECK(sq.isZero(), "bad-input", "d^2 != 0 at degree " + std::to_string(n));
    }
}

Mat degAt(const DegMap& f, int n, int rows, int cols) {
    auto it = f.find(n);
    if (it != f.end()) return it->second;
    return Mat(rows, cols);
}

DegMap degIdentity(const ChainComplex& A) {
    DegMap f;
    for (auto& [n, ls] : A.bas)
        if (!ls.empty()) f[n] = Mat::id((int)ls.size());
    return f;
}

DegMap degZero(const ChainComplex& A, const ChainComplex& B) {
    DegMap f;
    for (auto& [n, ls] : A.bas)
        if (!ls.empty()) f[n] = Mat(B.dim(n), (int)ls.size());
    return f;
}

DegMap degCompose(const DegMap& f, const DegMap& g, const Ring& R) {
    DegMap h;
    for (auto& [n, fm] : f) {
        auto it = g.find(n);
        if (it == g.end()) continue;  // absent entries are zero maps
        h[n] = it->second.mul(fm, R);
    }
    return h;
}

DegMap degAdd(const DegMap& f, const DegMap& g, const Ring& R) {
    DegMap h = f;
    for (auto& [n, gm] : g) {
        auto it = h.find(n);
        if (it == h.end())
            h[n] = gm;
        else
            it->second = it->second.add(gm, R);
    }
    return h;
}

DegMap degSub(const DegMap& f, const DegMap& g, const Ring& R) {
    DegMap h = f;
    for (auto& [n, gm] : g) {
        auto it = h.find(n);
        if (it == h.end())
            h[n] = gm.scaled(Q(-1), R);
        else
            it->second = it->second.sub(gm, R);
    }
    return h;
}

bool degEqual(const DegMap& f, const DegMap& g) {
    for (auto& [n, m] : f) {
        Mat gm = degAt(g, n, m.rows, m.cols);
        if (!(m == gm)) return false;
    }
    for (auto& [n, m] : g)
        if (!f.count(n) && !m.isZero()) return false;
    return true;
}

bool degIsZero(const DegMap& f) {
    for (auto& [n, m] : f) {
        (void)n;
        if (!m.isZero()) return false;
    }
    return true;
}

void checkChainMap(const ChainComplex& A, const ChainComplex& B, const DegMap& f) {
    for (auto& [n, ls] : A.bas) {
        if (ls.empty()) continue;
        Mat fn = degAt(f, n, B.dim(n), (int)ls.size());
        OT_CHECK(fn.rows == B.dim(n) && fn.cols == (int)ls.size(), "bad-input",
                 "chain map has wrong shape at degree " + std::to_string(n));
        Mat lhs = degAt(f, n - 1, B.dim(n - 1), A.dim(n - 1)).mul(A.dmat(n), A.ring);
        Mat rhs = B.dmat(n).mul(fn, A.ring);
        OT_CHECK(lhs == rhs, "bad-input",
                 "map fails to commute with the differential at degree " + std::to_string(n));
    }
}

bool isChainMap(const ChainComplex& A, const ChainComplex& B, const DegMap& f) {
    try {
        checkChainMap(A, B, f);
        return true;
    } catch (const Error&) {
        return false;
    }
}

ChainComplex concentrated(const Ring& R, int degree, const std::vector<std::string>& labels) {
    ChainComplex C;
    C.ring = R;
    if (!labels.empty()) C.bas[degree] = labels;
    return C;
}

ChainComplex zeroComplex(const Ring& R) {
    ChainComplex C;
    C.ring = R;
    return C;
}

ChainComplex restrictToWindow(const ChainComplex& C, int lo, int hi) {
    ChainComplex out;
    out.ring = C.ring;
    for (auto& [n, ls] : C.bas)
        if (n >= lo && n <= hi && !ls.empty()) out.bas[n] = ls;
    for (auto& [n, m] : C.d)
        if (n > lo && n <= hi) out.d[n] = m;
    return out;
}

ChainComplex directSum(const ChainComplex& A, const ChainComplex& B) {
    OT_CHECK(A.ring == B.ring, "wrong-ring", "direct sum over mismatched rings");
    ChainComplex out;
    out.ring = A.ring;
    std::set<int> degs;
    for (auto& [n, ls] : A.bas) { (void)ls; degs.insert(n); }
    for (auto& [n, ls] : B.bas) { (void)ls; degs.insert(n); }
    for (int n : degs) {
        std::vector<std::string> ls;
        for (auto& l : (A.dim(n) ? A.bas.at(n) : std::vector<std::string>{})) ls.push_back(l);
        for (auto& l : (B.dim(n) ? B.bas.at(n) : std::vector<std::string>{})) ls.push_back(l);
        if (!ls.empty()) out.bas[n] = ls;
    }
    for (int n : degs) {
        Mat d(out.dim(n - 1), out.dim(n));
        Mat da = A.dmat(n), db = B.dmat(n);
        for (int j = 0; j < da.cols; j++)
            for (auto& [r, v] : da.c[j]) d.set(r, j, v);
        for (int j = 0; j < db.cols; j++)
            for (auto& [r, v] : db.c[j]) d.set(A.dim(n - 1) + r, A.dim(n) + j, v);
        out.setDiff(n, d);
    }
    return out;
}

HomologyReport homology(const ChainComplex& C) {
    HomologyReport h;
    h.ring = C.ring;
    for (auto& [n, ls] : C.bas) {
        if (ls.empty()) continue;
        if (C.ring.isField()) {
            long r = (long)ls.size() - rankField(C.dmat(n), C.ring) - rankField(C.dmat(n + 1), C.ring);
            if (r > 0) h.freeRank[n] = r;
        } else {
            Mat K = kernelZ(C.dmat(n));
            if (K.cols == 0) continue;
            auto X = solveZ(K, C.dmat(n + 1));
            OT_CHECK(X.has_value(), "internal", "boundaries not contained in saturated cycle lattice");
            CokerPres pres = cokernelPresentation(*X, C.ring);
            if (pres.freeRank > 0) h.freeRank[n] = pres.freeRank;
            if (!pres.torsion.empty()) h.torsion[n] = pres.torsion;
        }
    }
    return h;
}

int connectivity(const HomologyReport& h, int top) {
    int c = -1;
    for (int n = 0; n <= top; n++) {
        if (!h.trivialAt(n)) break;
        c = n;
    }
    // degrees below zero count too when the report has them
    if (!h.freeRank.empty() && h.freeRank.begin()->first < 0) return -1;
    if (!h.torsion.empty() && h.torsion.begin()->first < 0) return -1;
    return c;
}

HomologyBasis homologyBasis(const ChainComplex& C) {
    OT_CHECK(C.ring.isField(), "wrong-ring", "homology bases require a field");
    HomologyBasis H;
    H.ring = C.ring;
    for (auto& [n, ls] : C.bas) {
        if (ls.empty()) continue;
        Mat K = kernelField(C.dmat(n), C.ring);
        auto X = solveField(K, C.dmat(n + 1), C.ring);
        OT_CHECK(X.has_value(), "internal", "boundaries are not cycles");
        Echelon e = columnEchelon(*X, C.ring, false);
        std::set<int> piv(e.pivotRow.begin(), e.pivotRow.end());
        Mat picked(K.rows, 0);
        for (int t = 0; t < K.cols; t++) {
            if (piv.count(t)) continue;
            Mat col(K.rows, 1);
            for (auto& [r, v] : K.c[t]) col.set(r, 0, v);
            picked = picked.hcat(col);
        }
        H.kernel[n] = K;
        H.bdry[n] = std::move(e);
        H.picked[n] = picked;
        if (picked.cols > 0) H.dim[n] = picked.cols;
    }
    return H;
}

std::map<int, Q> HomologyBasis::classOf(int n, const std::map<int, Q>& v, const ChainComplex& C) const {
    auto itK = kernel.find(n);
    if (itK == kernel.end()) {
        OT_CHECK(v.empty(), "internal", "nonzero vector in empty degree");
        return {};
    }
    Mat vm(itK->second.rows, 1);
    for (auto& [r, x] : v) vm.set(r, 0, x);
    auto c = solveField(itK->second, vm, ring);
    OT_CHECK(c.has_value(), "internal", "classOf: vector is not a cycle");
    (void)C;
    std::map<int, Q> coords = c->c.empty() ? std::map<int, Q>{} : c->c[0];
    coords = reduceModulo(bdry.at(n), coords, ring);
    std::set<int> piv(bdry.at(n).pivotRow.begin(), bdry.at(n).pivotRow.end());
    std::map<int, Q> out;
    int pos = 0;
    for (int t = 0; t < itK->second.cols; t++) {
        if (piv.count(t)) continue;
        auto it = coords.find(t);
        if (it != coords.end() && it->second != 0) out[pos] = it->second;
        pos++;
    }
    return out;
}

Mat inducedOnHomology(const HomologyBasis& HA, const HomologyBasis& HB,
                      const ChainComplex& A, const ChainComplex& B, const DegMap& f, int n) {
    Mat out(HB.dimAt(n), HA.dimAt(n));
    auto itP = HA.picked.find(n);
    if (itP == HA.picked.end() || itP->second.cols == 0) return out;
    Mat fn = degAt(f, n, B.dim(n), A.dim(n));
    Mat w = fn.mul(itP->second, A.ring);
    for (int j = 0; j < w.cols; j++) {
        auto cls = HB.classOf(n, w.c[j], B);
        for (auto& [r, v] : cls) out.set(r, j, v);
    }
    return out;
}

int mapConnectivity(const ChainComplex& A, const ChainComplex& B, const DegMap& f, int top) {
    HomologyBasis HA = homologyBasis(A), HB = homologyBasis(B);
    int lo = std::min(A.bas.empty() ? 0 : A.lowDegree(), B.bas.empty() ? 0 : B.lowDegree());
    for (int n = lo; n <= top; n++) {
        Mat m = inducedOnHomology(HA, HB, A, B, f, n);
        long r = rankField(m, A.ring);
        bool iso = (m.rows == m.cols && r == m.rows);
        if (iso) continue;
        bool epi = (r == m.rows);
        return epi ? n : n - 1;
    }
    return top + 1;
}

long TensorIndex::indexOf(int n, const std::vector<int>& degs, const std::vector<int>& idxs) const {
    auto itL = lut.find(n);
    OT_CHECK(itL != lut.end(), "internal", "tensor index: no such degree");
    auto itB = itL->second.find(degs);
    OT_CHECK(itB != itL->second.end(), "internal", "tensor index: no such degree composition");
    const Block& b = blocks.at(n)[itB->second];
    long pos = b.offset;
    long stride = 1;
    for (int i = (int)b.dims.size() - 1; i >= 0; i--) {
        pos += idxs[i] * stride;
        stride *= b.dims[i];
    }
    return pos;
}

std::pair<std::vector<int>, std::vector<int>> TensorIndex::at(int n, long pos) const {
    auto it = blocks.find(n);
    OT_CHECK(it != blocks.end(), "internal", "tensor index: no such degree");
    const auto& bs = it->second;
    int lo = 0, hi = (int)bs.size() - 1, bi = 0;
    while (lo <= hi) {
        int mid = (lo + hi) / 2;
        if (bs[mid].offset <= pos) { bi = mid; lo = mid + 1; }
        else hi = mid - 1;
    }
    const Block& b = bs[bi];
    long rel = pos - b.offset;
    std::vector<int> idxs(b.dims.size());
    for (int i = (int)b.dims.size() - 1; i >= 0; i--) {
        idxs[i] = (int)(rel % b.dims[i]);
        rel /= b.dims[i];
    }
    return {b.deg, idxs};
}

TensorComplex tensorMany(const std::vector<const ChainComplex*>& fac, int degLo, int degHi) {
    OT_CHECK(!fac.empty(), "bad-input", "tensor of zero factors");
    Ring R = fac[0]->ring;
    for (auto* f : fac) OT_CHECK(f->ring == R, "wrong-ring", "tensor over mismatched rings");

    TensorComplex T;
    T.C.ring = R;
    int k = (int)fac.size();

    std::vector<std::vector<int>> degsOf(k);  // support degrees, ascending
    std::vector<int> minDeg(k), maxDeg(k);
    for (int i = 0; i < k; i++) {
        for (auto& [n, ls] : fac[i]->bas)
            if (!ls.empty()) degsOf[i].push_back(n);
        if (degsOf[i].empty()) return T;  // tensor with zero complex is zero
        minDeg[i] = degsOf[i].front();
        maxDeg[i] = degsOf[i].back();
    }
    std::vector<int> minTail(k + 1, 0), maxTail(k + 1, 0);
    for (int i = k - 1; i >= 0; i--) {
        minTail[i] = minTail[i + 1] + minDeg[i];
        maxTail[i] = maxTail[i + 1] + maxDeg[i];
    }

    // enumerate degree compositions for each total degree in the window
    std::vector<int> cur(k);
    std::function<void(int, int, int)> rec = [&](int i, int rem, int n) {
        if (i == k) {
            if (rem != 0) return;
            TensorIndex::Block b;
            b.deg = cur;
            b.dims.resize(k);
            long sz = 1;
            for (int j = 0; j < k; j++) {
                b.dims[j] = fac[j]->dim(cur[j]);
                sz *= b.dims[j];
            }
            if (sz == 0) return;
            auto& vec = T.ix.blocks[n];
            b.offset = vec.empty() ? 0 : vec.back().offset + [&] {
                long s = 1;
                for (int d : vec.back().dims) s *= d;
                return s;
            }();
            T.ix.lut[n][b.deg] = (int)vec.size();
            vec.push_back(std::move(b));
            return;
        }
        for (int dg : degsOf[i]) {
            int r2 = rem - dg;
            if (r2 < minTail[i + 1] || r2 > maxTail[i + 1]) continue;
            cur[i] = dg;
            rec(i + 1, r2, n);
        }
    };
    for (int n = std::max(degLo, minTail[0]); n <= std::min(degHi, maxTail[0]); n++) rec(0, n, n);

    // basis labels
    for (auto& [n, bs] : T.ix.blocks) {
        std::vector<std::string>& ls = T.C.bas[n];
        for (auto& b : bs) {
            long sz = 1;
            for (int d : b.dims) sz *= d;
            std::vector<int> idx(k, 0);
            for (long p = 0; p < sz; p++) {
                std::string lab;
                for (int j = 0; j < k; j++) {
                    if (j) lab += "*";
                    lab += fac[j]->bas.at(b.deg[j])[idx[j]];
                }
                ls.push_back(lab);
                for (int j = k - 1; j >= 0; j--) {
                    if (++idx[j] < b.dims[j]) break;
                    idx[j] = 0;
                }
            }
        }
        if (ls.empty()) T.C.bas.erase(n);
    }

    // differential with Koszul signs
    for (auto& [n, bs] : T.ix.blocks) {
        if (!T.ix.blocks.count(n - 1)) continue;
        Mat d(T.C.dim(n - 1), T.C.dim(n));
        for (auto& b : bs) {
            std::vector<Mat> dj(k);
            for (int j = 0; j < k; j++) dj[j] = fac[j]->dmat(b.deg[j]);
            long sz = 1;
            for (int dd : b.dims) sz *= dd;
            std::vector<int> idx(k, 0);
            for (long p = 0; p < sz; p++) {
                long col = b.offset + p;
                int signExp = 0;
                for (int j = 0; j < k; j++) {
                    std::vector<int> tdeg = b.deg;
                    tdeg[j] -= 1;
                    auto itL = T.ix.lut.find(n - 1);
                    bool present = itL != T.ix.lut.end() && itL->second.count(tdeg);
                    if (present && dj[j].rows > 0) {
                        Q sgn = (signExp % 2 == 0) ? Q(1) : Q(-1);
                        std::vector<int> tidx = idx;
                        for (auto& [r, v] : dj[j].c[idx[j]]) {
                            tidx[j] = r;
                            long row = T.ix.indexOf(n - 1, tdeg, tidx);
                            d.add((int)row, (int)col, R.mul(sgn, v), R);
                        }
                    }
                    signExp += b.deg[j];
                }
                for (int j = k - 1; j >= 0; j--) {
                    if (++idx[j] < b.dims[j]) break;
                    idx[j] = 0;
                }
            }
        }
        T.C.setDiff(n, d);
    }
    return T;
}

ChainComplex tensor(const ChainComplex& A, const ChainComplex& B) {
    if (A.bas.empty() || B.bas.empty()) return zeroComplex(A.ring);
    int lo = A.lowDegree() + B.lowDegree();
    int hi = A.topDegree() + B.topDegree();
    return tensorMany({&A, &B}, lo, hi).C;
}

DegMap tensorFactorPermute(const TensorComplex& src, const TensorComplex& dst,
                           const std::vector<int>& srcOf, const Ring& R) {
    int k = (int)srcOf.size();
    DegMap out;
    for (auto& [n, bs] : src.ix.blocks) {
        Mat M(dst.C.dim(n), src.C.dim(n));
        for (auto& b : bs) {
            long sz = 1;
            for (int d : b.dims) sz *= d;
            std::vector<int> ddeg(k), didx(k), idx(k, 0);
            for (int i = 0; i < k; i++) ddeg[i] = b.deg[srcOf[i]];
            // Koszul sign: one factor per inversion pair that crosses
            long flips = 0;
            for (int i = 0; i < k; i++)
                for (int j = i + 1; j < k; j++)
                    if (srcOf[i] > srcOf[j]) flips += (long)ddeg[i] * ddeg[j];
            Q s = (flips % 2 == 0) ? Q(1) : Q(-1);
            for (long p = 0; p < sz; p++) {
                for (int i = 0; i < k; i++) didx[i] = idx[srcOf[i]];
                M.set(dst.ix.indexOf(n, ddeg, didx), b.offset + p, s);
                for (int j = k - 1; j >= 0; j--) {
                    if (++idx[j] < b.dims[j]) break;
                    idx[j] = 0;
                }
            }
        }
        if (!M.isZero()) out[n] = std::move(M);
    }
    (void)R;
    return out;
}

DegMap applyOnFactors(const TensorComplex& src, int loFac, int hiFac, const DegMap& g,
                      const TensorComplex& gSrc, const ChainComplex& gTgt,
                      const TensorComplex& dst, const Ring& R) {
    (void)gTgt;
    DegMap out;
    for (auto& [n, bs] : src.ix.blocks) {
        Mat M(dst.C.dim(n), src.C.dim(n));
        for (auto& b : bs) {
            int k = (int)b.deg.size();
            long sz = 1;
            for (int d : b.dims) sz *= d;
            std::vector<int> gdeg(b.deg.begin() + loFac, b.deg.begin() + hiFac + 1);
            int bdeg = 0;
            for (int d : gdeg) bdeg += d;
            auto git = g.find(bdeg);
            if (git == g.end()) continue;
            std::vector<int> idx(k, 0);
            for (long p = 0; p < sz; p++) {
                std::vector<int> gidx(idx.begin() + loFac, idx.begin() + hiFac + 1);
                long col = gSrc.ix.indexOf(bdeg, gdeg, gidx);
                for (auto& [row, val] : git->second.c[col]) {
                    std::vector<int> ndeg, nidx;
                    for (int i = 0; i < loFac; i++) { ndeg.push_back(b.deg[i]); nidx.push_back(idx[i]); }
                    ndeg.push_back(bdeg); nidx.push_back(row);
                    for (int i = hiFac + 1; i < k; i++) { ndeg.push_back(b.deg[i]); nidx.push_back(idx[i]); }
                    M.add(dst.ix.indexOf(n, ndeg, nidx), b.offset + p, val, R);
                }
                for (int j = k - 1; j >= 0; j--) {
                    if (++idx[j] < b.dims[j]) break;
                    idx[j] = 0;
                }
            }
        }
        if (!M.isZero()) out[n] = std::move(M);
    }
    return out;
}

ChainComplex cone(const ChainComplex& A, const ChainComplex& B, const DegMap& f) {
    checkChainMap(A, B, f);
    ChainComplex C;
    C.ring = A.ring;
    std::set<int> degs;
    for (auto& [n, ls] : A.bas) { (void)ls; degs.insert(n + 1); }
    for (auto& [n, ls] : B.bas) { (void)ls; degs.insert(n); }
    for (int n : degs) {
        std::vector<std::string> ls;
        for (int i = 0; i < A.dim(n - 1); i++) ls.push_back("s(" + A.bas.at(n - 1)[i] + ")");
        for (int i = 0; i < B.dim(n); i++) ls.push_back(B.bas.at(n)[i]);
        if (!ls.empty()) C.bas[n] = ls;
    }
    for (int n : degs) {
        int ra = A.dim(n - 2), rb = B.dim(n - 1);
        Mat d(ra + rb, C.dim(n));
        Mat da = A.dmat(n - 1);
        for (int j = 0; j < da.cols; j++)
            for (auto& [r, v] : da.c[j]) d.set(r, j, A.ring.neg(v));
        Mat fn = degAt(f, n - 1, rb, A.dim(n - 1));
        for (int j = 0; j < fn.cols; j++)
            for (auto& [r, v] : fn.c[j]) d.set(ra + r, j, v);
        Mat db = B.dmat(n);
        for (int j = 0; j < db.cols; j++)
            for (auto& [r, v] : db.c[j]) d.set(ra + r, A.dim(n - 1) + j, v);
        C.setDiff(n, d);
    }
    C.validate();
    return C;
}

ChainComplex totalize(const DoubleComplex& D) {
    auto dimAt = [&](int p, int q) { return D.dimAt(p, q); };
    auto dvAt = [&](int p, int q) {
        auto it = D.dv.find({p, q});
        if (it != D.dv.end()) return it->second;
        return Mat(dimAt(p, q - 1), dimAt(p, q));
    };
    auto dhAt = [&](int p, int q) {
        auto it = D.dh.find({p, q});
        if (it != D.dh.end()) return it->second;
        return Mat(dimAt(p - 1, q), dimAt(p, q));
    };
    for (auto& [pq, ls] : D.bas) {
        if (ls.empty()) continue;
        auto [p, q] = pq;
        OT_CHECK(dvAt(p, q - 1).mul(dvAt(p, q), D.ring).isZero(), "sign-convention",
                 "vertical differential does not square to zero");
        OT_CHECK(dhAt(p - 1, q).mul(dhAt(p, q), D.ring).isZero(), "sign-convention",
                 "horizontal differential does not square to zero");
        Mat a = dvAt(p - 1, q).mul(dhAt(p, q), D.ring);
        Mat b = dhAt(p, q - 1).mul(dvAt(p, q), D.ring);
        OT_CHECK(a == b, "sign-convention", "horizontal and vertical differentials do not commute");
    }

    ChainComplex C;
    C.ring = D.ring;
    std::map<int, std::vector<std::pair<int, int>>> cells;  // total degree -> (p,q) blocks
    std::map<std::pair<int, int>, long> offset;
    for (auto& [pq, ls] : D.bas) {
        if (ls.empty()) continue;
        cells[pq.first + pq.second].push_back(pq);
    }
    for (auto& [n, ps] : cells) {
        std::sort(ps.begin(), ps.end());
        long off = 0;
        std::vector<std::string>& ls = C.bas[n];
        for (auto& pq : ps) {
            offset[pq] = off;
            for (auto& l : D.bas.at(pq))
                ls.push_back("[" + std::to_string(pq.first) + "," + std::to_string(pq.second) + "]" + l);
            off += (long)D.bas.at(pq).size();
        }
    }
    for (auto& [n, ps] : cells) {
        if (!cells.count(n - 1)) continue;
        Mat d(C.dim(n - 1), C.dim(n));
        for (auto& pq : ps) {
            auto [p, q] = pq;
            long co = offset[pq];
            if (offset.count({p, q - 1})) {
                long ro = offset[{p, q - 1}];
                Mat m = dvAt(p, q);
                for (int j = 0; j < m.cols; j++)
                    for (auto& [r, v] : m.c[j]) d.add((int)(ro + r), (int)(co + j), v, D.ring);
            }
            if (offset.count({p - 1, q})) {
                long ro = offset[{p - 1, q}];
                Mat m = dhAt(p, q);
                Q sgn = (q % 2 == 0) ? Q(1) : Q(-1);
                for (int j = 0; j < m.cols; j++)
                    for (auto& [r, v] : m.c[j]) d.add((int)(ro + r), (int)(co + j), D.ring.mul(sgn, v), D.ring);
            }
        }
        C.setDiff(n, d);
    }
    for (auto& [n, m] : C.d) {
        if (C.dim(n - 2) == 0) continue;
        OT_CHECK(C.dmat(n - 1).mul(m, C.ring).isZero(), "sign-convention",
                 "total differential does not square to zero");
    }
    return C;
}

SubComplex subcomplexFromSpan(const ChainComplex& C, const DegMap& span) {
    SubComplex S;
    S.sub.ring = C.ring;
    std::map<int, Mat> basis;
    for (auto& [n, m] : span) {
        OT_CHECK(m.rows == C.dim(n), "bad-input", "span has wrong shape at degree " + std::to_string(n));
        Echelon e = columnEchelon(m, C.ring, false);
        if (C.ring.kind == RingKind::Z)
            OT_CHECK(e.unitPivots, "unsupported-derived-context",
                     "span is not a direct summand over Z (non-unit pivots)");
        if (e.basis.cols == 0) continue;
        basis[n] = e.basis;
        std::vector<std::string> ls;
        for (int i = 0; i < e.basis.cols; i++)
            ls.push_back("w" + std::to_string(n) + "." + std::to_string(i));
        S.sub.bas[n] = ls;
        S.incl[n] = e.basis;
    }
    for (auto& [n, b] : basis) {
        Mat img = C.dmat(n).mul(b, C.ring);
        if (img.isZero()) continue;
        auto it = basis.find(n - 1);
        OT_CHECK(it != basis.end(), "not-subcomplex", "span is not closed under the differential");
        std::optional<Mat> X = C.ring.isField() ? solveField(it->second, img, C.ring)
                                                : solveZ(it->second, img);
        OT_CHECK(X.has_value(), "not-subcomplex", "span is not closed under the differential");
        S.sub.setDiff(n, *X);
    }
    S.sub.validate();
    return S;
}

QuotientData quotientComplex(const ChainComplex& C, const DegMap& relations) {
    QuotientData Qd;
    Qd.quot.ring = C.ring;
    Qd.monomial = true;
    std::map<int, Echelon> ech;
    std::map<int, std::vector<int>> keep;
    for (auto& [n, ls] : C.bas) {
        if (ls.empty()) continue;
        Mat rel = degAt(relations, n, (int)ls.size(), 0);
        OT_CHECK(rel.rows == (int)ls.size(), "bad-input", "relations have wrong shape");
        Echelon e = columnEchelon(rel, C.ring, false);
        if (C.ring.kind == RingKind::Z)
            OT_CHECK(e.unitPivots, "unsupported-derived-context",
                     "relation span is not a direct summand over Z (non-unit pivots)");
        std::set<int> piv(e.pivotRow.begin(), e.pivotRow.end());
        std::vector<int>& T = keep[n];
        for (int i = 0; i < (int)ls.size(); i++)
            if (!piv.count(i)) T.push_back(i);
        std::map<int, int> rowPos;
        for (int i = 0; i < (int)T.size(); i++) rowPos[T[i]] = i;

        Mat proj((int)T.size(), (int)ls.size());
        for (int i = 0; i < (int)ls.size(); i++) {
            if (rowPos.count(i)) {
                proj.set(rowPos[i], i, Q(1));
                continue;
            }
            std::map<int, Q> v{{i, Q(1)}};
            v = reduceModulo(e, v, C.ring);
            int nnz = 0;
            for (auto& [r, x] : v) {
                if (x == 0) continue;
                proj.set(rowPos.at(r), i, x);
                nnz++;
            }
            if (nnz > 1) Qd.monomial = false;
        }
        Mat sect((int)ls.size(), (int)T.size());
        std::vector<std::string> qls;
        for (int i = 0; i < (int)T.size(); i++) {
            sect.set(T[i], i, Q(1));
            qls.push_back(ls[T[i]]);
        }
        if (!qls.empty()) Qd.quot.bas[n] = qls;
        Qd.proj[n] = proj;
        Qd.sect[n] = sect;
        ech[n] = std::move(e);
    }
    for (auto& [n, ls] : C.bas) {
        if (ls.empty()) continue;
        Mat rel = degAt(relations, n, (int)ls.size(), 0);
        Mat pd = degAt(Qd.proj, n - 1, Qd.quot.dim(n - 1), C.dim(n - 1)).mul(C.dmat(n), C.ring);
        OT_CHECK(pd.mul(rel, C.ring).isZero(), "not-subcomplex",
                 "relations are not closed under the differential");
        Qd.quot.setDiff(n, pd.mul(Qd.sect.at(n), C.ring));
    }
    Qd.quot.validate();
    return Qd;
}

LimResult limAndLim1(const GradedTower& T) {
    LimResult out;
    out.conclusive = true;
    out.lim1Zero = true;
    int S = (int)T.stageDim.size();
    OT_CHECK(S >= 1, "bad-input", "tower needs at least one stage");
    OT_CHECK((int)T.down.size() == S - 1, "bad-input", "tower maps do not match stage count");

    std::set<int> degs;
    for (auto& sd : T.stageDim)
        for (auto& [n, r] : sd) { (void)r; degs.insert(n); }

    for (int n : degs) {
        auto dimAt = [&](int s) {
            auto it = T.stageDim[s].find(n);
            return it == T.stageDim[s].end() ? 0 : it->second;
        };
        int stab = 0;
        bool allIsoTail = true;
        for (int s = S - 2; s >= 0; s--) {
            Mat m = degAt(T.down[s], n, dimAt(s), dimAt(s + 1));
            bool surj, iso;
            if (T.ring.isField()) {
                long r = rankField(m, T.ring);
                surj = (r == m.rows);
                iso = surj && m.rows == m.cols;
            } else {
                CokerPres cp = cokernelPresentation(m, T.ring);
                surj = (cp.freeRank == 0 && cp.torsion.empty());
                iso = surj && m.rows == m.cols && kernelZ(m).cols == 0;
            }
            if (!surj) out.lim1Zero = false;
            if (allIsoTail && !iso) {
                allIsoTail = false;
                stab = s + 1;
            }
        }
        if (allIsoTail) stab = 0;
        if (stab >= S - 1 && S > 1) {
            out.conclusive = false;
            if (out.note.empty())
                out.note = "tower does not stabilize within the provided stages (degree " +
                           std::to_string(n) + ")";
            continue;
        }
        out.stabilizationIndex[n] = stab;
        out.limRank[n] = dimAt(stab);
    }
    return out;
}

}  // namespace ot
