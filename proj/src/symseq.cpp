#include "optower/symseq.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace ot {

std::vector<int> adjacentWord(const std::vector<int>& sigma) {
    std::vector<int> a = sigma, word;
    bool moved = true;
    while (moved) {
        moved = false;
        for (int j = 0; j + 1 < (int)a.size(); j++) {
            if (a[j] > a[j + 1]) {
                std::swap(a[j], a[j + 1]);
                word.push_back(j);
                moved = true;
            }
        }
    }
    return word;
}

DegMap SymSeq::actionMap(int r, const std::vector<int>& sigma) const {
    OT_CHECK(r >= 0 && r <= Rmax && (int)sigma.size() == r, "bad-input", "action level mismatch");
    DegMap M = degIdentity(lev[r]);
    for (int j : adjacentWord(sigma)) M = degCompose(M, act[r][j], ring);
    return M;
}

std::vector<int> blockPermutation(const std::vector<int>& tau, const std::vector<int>& sizes) {
    int t = (int)tau.size();
    OT_CHECK((int)sizes.size() == t, "bad-input", "block count mismatch");
    if (t == 0) return {};
    std::vector<int> newSize(t), off(t, 0), newOff(t, 0);
    for (int j = 0; j < t; j++) newSize[tau[j] - 1] = sizes[j];
    for (int j = 1; j < t; j++) {
        off[j] = off[j - 1] + sizes[j - 1];
        newOff[j] = newOff[j - 1] + newSize[j - 1];
    }
    int s = off[t - 1] + sizes[t - 1];
    std::vector<int> out(s);
    for (int j = 0; j < t; j++)
        for (int i = 0; i < sizes[j]; i++)
            out[off[j] + i] = newOff[tau[j] - 1] + i + 1;
    return out;
}

void validateSeqActions(const Ring& R, const std::vector<ChainComplex>& lev,
                        const std::vector<std::vector<DegMap>>& act) {
    OT_CHECK(lev.size() == act.size(), "bad-input", "levels and actions out of step");
    for (int r = 0; r < (int)lev.size(); r++) {
        OT_CHECK((int)act[r].size() == std::max(0, r - 1), "bad-input",
                 "level " + std::to_string(r) + " needs " + std::to_string(std::max(0, r - 1)) +
                     " transposition generators");
        const ChainComplex& C = lev[r];
        DegMap id = degIdentity(C);
        for (int i = 0; i < (int)act[r].size(); i++) {
            checkChainMap(C, C, act[r][i]);
            OT_CHECK(degEqual(degCompose(act[r][i], act[r][i], R), id), "bad-input",
                     "generator " + std::to_string(i) + " at level " + std::to_string(r) +
                         " is not an involution");
        }
        for (int i = 0; i + 1 < (int)act[r].size(); i++) {
            DegMap lhs = degCompose(degCompose(act[r][i], act[r][i + 1], R), act[r][i], R);
            DegMap rhs = degCompose(degCompose(act[r][i + 1], act[r][i], R), act[r][i + 1], R);
            OT_CHECK(degEqual(lhs, rhs), "bad-input",
                     "braid relation fails at level " + std::to_string(r) + ", generator " +
                         std::to_string(i));
        }
        for (int i = 0; i < (int)act[r].size(); i++)
            for (int j = i + 2; j < (int)act[r].size(); j++) {
                DegMap lhs = degCompose(act[r][i], act[r][j], R);
                DegMap rhs = degCompose(act[r][j], act[r][i], R);
                OT_CHECK(degEqual(lhs, rhs), "bad-input",
                         "distant generators fail to commute at level " + std::to_string(r));
            }
    }
}

void SymSeq::validateActions() const { validateSeqActions(ring, lev, act); }

SymSeq emptySeq(const Ring& R, int Rmax) {
    SymSeq S;
    S.ring = R;
    S.Rmax = Rmax;
    S.lev.assign(Rmax + 1, zeroComplex(R));
    S.act.resize(Rmax + 1);
    for (int r = 0; r <= Rmax; r++) S.act[r].resize(std::max(0, r - 1));
    return S;
}

SymSeq unitSeq(const Ring& R, int Rmax) {
    SymSeq S = emptySeq(R, Rmax);
    OT_CHECK(Rmax >= 1, "bad-input", "unit sequence needs at least level 1");
    S.lev[1] = concentrated(R, 0, {"1"});
    return S;
}

SymSeq truncateSeq(const SymSeq& A, int k) {
    OT_CHECK(k >= 1, "bad-input", "truncation level must be at least 1");
    SymSeq S = A;
    for (int r = k + 1; r <= S.Rmax; r++) {
        S.lev[r] = zeroComplex(S.ring);
        S.act[r].assign(std::max(0, r - 1), DegMap{});
    }
    return S;
}

SymSeq levelOnlySeq(const SymSeq& A, int k) {
    OT_CHECK(k >= 0, "bad-input", "level must be nonnegative");
    SymSeq S = A;
    for (int r = 0; r <= S.Rmax; r++) {
        if (r == k) continue;
        S.lev[r] = zeroComplex(S.ring);
        S.act[r].assign(std::max(0, r - 1), DegMap{});
    }
    return S;
}

SymSeq aboveSeq(const SymSeq& A, int k) {
    SymSeq S = A;
    for (int r = 0; r <= std::min(k, S.Rmax); r++) {
        S.lev[r] = zeroComplex(S.ring);
        S.act[r].assign(std::max(0, r - 1), DegMap{});
    }
    return S;
}

PowerSeq tensorOfSeqs(const std::vector<const SymSeq*>& fac, int Rmax, int degHi, bool wantLeft) {
    OT_CHECK(!fac.empty(), "bad-input", "tensor of zero sequences");
    Ring R = fac[0]->ring;
    int t = (int)fac.size();
    for (auto* F : fac) {
        OT_CHECK(F->ring == R, "wrong-ring", "tensor over mismatched rings");
        OT_CHECK(F->levelDim(0) == 0, "bad-input",
                 "tensor powers need reduced sequences (empty level 0)");
        if (wantLeft)
            OT_CHECK(F == fac[0], "bad-input", "left action needs identical tensor factors");
    }

    PowerSeq P;
    P.ring = R;
    P.t = t;
    P.Rmax = Rmax;
    P.blocks.resize(Rmax + 1);
    P.fIndex.resize(Rmax + 1);
    P.offsets.resize(Rmax + 1);
    P.lev.assign(Rmax + 1, zeroComplex(R));
    P.rightGens.resize(Rmax + 1);
    P.leftGens.resize(Rmax + 1);
    for (int r = 0; r <= Rmax; r++) {
        P.rightGens[r].assign(std::max(0, r - 1), DegMap{});
        P.leftGens[r].assign(wantLeft ? std::max(0, t - 1) : 0, DegMap{});
    }

    for (int r = t; r <= Rmax; r++) {
        // enumerate f : [r] -> [t] with all fibers nonempty
        std::vector<int> f(r);
        std::function<void(int, int)> rec = [&](int pos, int used) {
            if (r - pos < t - used) return;
            if (pos == r) {
                if (used < t) return;
                std::vector<int> fib(t, 0);
                for (int v : f) fib[v]++;
                std::vector<const ChainComplex*> fcs;
                bool empty = false;
                for (int j = 0; j < t; j++) {
                    if (fac[j]->levelDim(fib[j]) == 0) empty = true;
                    fcs.push_back(&fac[j]->lev[fib[j]]);
                }
                if (empty) return;
                TensorComplex tc = tensorMany(fcs, 0, degHi);
                if (tc.C.bas.empty()) return;
                PowerSeq::FBlock b;
                b.f = f;
                b.fib = fib;
                b.tc = std::move(tc);
                P.fIndex[r][f] = (int)P.blocks[r].size();
                P.blocks[r].push_back(std::move(b));
                return;
            }
            for (int v = 0; v < t; v++) {
                bool fresh = true;
                for (int p = 0; p < pos; p++)
                    if (f[p] == v) { fresh = false; break; }
                f[pos] = v;
                rec(pos + 1, used + (fresh ? 1 : 0));
            }
        };
        rec(0, 0);
        if (P.blocks[r].empty()) continue;

        // concatenate blocks into the level complex
        std::set<int> degs;
        for (auto& b : P.blocks[r])
            for (auto& [n, ls] : b.tc.C.bas) { (void)ls; degs.insert(n); }
        for (int n : degs) {
            std::vector<long>& off = P.offsets[r][n];
            std::vector<std::string>& ls = P.lev[r].bas[n];
            for (auto& b : P.blocks[r]) {
                off.push_back((long)ls.size());
                if (b.tc.C.dim(n) == 0) continue;
                std::string pre = "(";
                for (int v : b.f) pre += std::to_string(v);
                pre += ")";
                for (auto& l : b.tc.C.bas.at(n)) ls.push_back(pre + l);
            }
        }
        for (int n : degs) {
            if (!degs.count(n - 1)) continue;
            Mat d(P.lev[r].dim(n - 1), P.lev[r].dim(n));
            for (int bi = 0; bi < (int)P.blocks[r].size(); bi++) {
                Mat bd = P.blocks[r][bi].tc.C.dmat(n);
                long ro = P.offsets[r][n - 1][bi], co = P.offsets[r][n][bi];
                for (int j = 0; j < bd.cols; j++)
                    for (auto& [row, v] : bd.c[j]) d.set((int)(ro + row), (int)(co + j), v);
            }
            P.lev[r].setDiff(n, d);
        }

        // right Sigma_r action
        for (int i = 0; i + 1 < r; i++) {
            DegMap G;
            for (auto& [n, ls] : P.lev[r].bas) {
                if (ls.empty()) continue;
                G[n] = Mat((int)ls.size(), (int)ls.size());
            }
            for (int bi = 0; bi < (int)P.blocks[r].size(); bi++) {
                const auto& b = P.blocks[r][bi];
                if (b.f[i] == b.f[i + 1]) {
                    int j = b.f[i];
                    int rank = 0;
                    for (int p = 0; p < i; p++)
                        if (b.f[p] == j) rank++;
                    const DegMap& A = fac[j]->act[b.fib[j]][rank];
                    for (auto& [n, Gm] : G) {
                        if (b.tc.C.dim(n) == 0) continue;
                        long co = P.offsets[r][n][bi];
                        for (long p = 0; p < b.tc.C.dim(n); p++) {
                            auto [dg, ix] = b.tc.ix.at(n, p);
                            auto itA = A.find(dg[j]);
                            if (itA == A.end()) continue;
                            std::vector<int> tix = ix;
                            for (auto& [row, v] : itA->second.c[ix[j]]) {
                                tix[j] = row;
                                long q = co + b.tc.ix.indexOf(n, dg, tix);
                                Gm.add((int)q, (int)(co + p), v, R);
                            }
                        }
                    }
                } else {
                    std::vector<int> f2 = b.f;
                    std::swap(f2[i], f2[i + 1]);
                    int b2 = P.fIndex[r].at(f2);
                    const auto& tb = P.blocks[r][b2];
                    for (auto& [n, Gm] : G) {
                        if (b.tc.C.dim(n) == 0) continue;
                        long co = P.offsets[r][n][bi], to = P.offsets[r][n][b2];
                        for (long p = 0; p < b.tc.C.dim(n); p++) {
                            auto [dg, ix] = b.tc.ix.at(n, p);
                            long q = to + tb.tc.ix.indexOf(n, dg, ix);
                            Gm.set((int)q, (int)(co + p), Q(1));
                        }
                    }
                }
            }
            P.rightGens[r][i] = std::move(G);
        }

        // left Sigma_t action with Koszul signs
        if (wantLeft) {
            for (int j = 0; j + 1 < t; j++) {
                DegMap G;
                for (auto& [n, ls] : P.lev[r].bas) {
                    if (ls.empty()) continue;
                    G[n] = Mat((int)ls.size(), (int)ls.size());
                }
                for (int bi = 0; bi < (int)P.blocks[r].size(); bi++) {
                    const auto& b = P.blocks[r][bi];
                    std::vector<int> f2 = b.f;
                    for (int& v : f2) {
                        if (v == j) v = j + 1;
                        else if (v == j + 1) v = j;
                    }
                    int b2 = P.fIndex[r].at(f2);
                    const auto& tb = P.blocks[r][b2];
                    for (auto& [n, Gm] : G) {
                        if (b.tc.C.dim(n) == 0) continue;
                        long co = P.offsets[r][n][bi], to = P.offsets[r][n][b2];
                        for (long p = 0; p < b.tc.C.dim(n); p++) {
                            auto [dg, ix] = b.tc.ix.at(n, p);
                            Q sgn = (dg[j] * dg[j + 1]) % 2 == 0 ? Q(1) : Q(-1);
                            std::swap(dg[j], dg[j + 1]);
                            std::swap(ix[j], ix[j + 1]);
                            long q = to + tb.tc.ix.indexOf(n, dg, ix);
                            Gm.set((int)q, (int)(co + p), sgn);
                        }
                    }
                }
                P.leftGens[r][j] = std::move(G);
            }
        }
    }
    return P;
}

PowerSeq tensorPower(const SymSeq& B, int t, int Rmax, int degHi) {
    OT_CHECK(t >= 1, "bad-input", "tensor power needs t >= 1");
    std::vector<const SymSeq*> fac(t, &B);
    return tensorOfSeqs(fac, Rmax, degHi, true);
}

PowerSeq pairTensor(const SymSeq& A, const SymSeq& B, int Rmax, int degHi) {
    return tensorOfSeqs({&A, &B}, Rmax, degHi, false);
}

Coinv coinvariants(const ChainComplex& M, const std::vector<DegMap>& rightGens,
                   const ChainComplex& N, const std::vector<DegMap>& leftGens, int degHi) {
    OT_CHECK(M.ring == N.ring, "wrong-ring", "coinvariants over mismatched rings");
    OT_CHECK(rightGens.size() == leftGens.size(), "bad-input",
             "coinvariants need matching generator counts on both sides");
    Coinv out;
    out.amb = (M.bas.empty() || N.bas.empty())
                  ? TensorComplex{zeroComplex(M.ring), {}}
                  : tensorMany({&M, &N}, M.lowDegree() + N.lowDegree(), degHi);
    if (out.amb.C.bas.empty()) {
        out.C = zeroComplex(M.ring);
        out.monomial = true;
        return out;
    }
    int g = (int)rightGens.size();
    DegMap rel;
    for (auto& [n, ls] : out.amb.C.bas) {
        int dim = (int)ls.size();
        Mat r(dim, g * dim);
        for (int p = 0; p < dim; p++) {
            auto [dg, ix] = out.amb.ix.at(n, p);
            for (int k = 0; k < g; k++) {
                int col = k * dim + p;
                auto itR = rightGens[k].find(dg[0]);
                if (itR != rightGens[k].end()) {
                    std::vector<int> tix = ix;
                    for (auto& [row, v] : itR->second.c[ix[0]]) {
                        tix[0] = row;
                        r.add((int)out.amb.ix.indexOf(n, dg, tix), col, v, M.ring);
                    }
                }
                auto itL = leftGens[k].find(dg[1]);
                if (itL != leftGens[k].end()) {
                    std::vector<int> tix = ix;
                    for (auto& [row, v] : itL->second.c[ix[1]]) {
                        tix[1] = row;
                        r.add((int)out.amb.ix.indexOf(n, dg, tix), col, M.ring.neg(v), M.ring);
                    }
                }
            }
        }
        rel[n] = std::move(r);
    }
    QuotientData qd = quotientComplex(out.amb.C, rel);
    out.C = std::move(qd.quot);
    out.proj = std::move(qd.proj);
    out.sect = std::move(qd.sect);
    out.monomial = qd.monomial;
    return out;
}

CircleSeq circleSeq(const SymSeq& A, const SymSeq& B, int Rmax, int degHi) {
    OT_CHECK(A.ring == B.ring, "wrong-ring", "circle product over mismatched rings");
    CircleSeq out;
    out.seq = emptySeq(A.ring, Rmax);
    out.parts.resize(Rmax + 1);

    for (int t = 1; t <= A.Rmax; t++) {
        if (A.levelDim(t) == 0) continue;
        PowerSeq Pow = tensorPower(B, t, Rmax, degHi);
        for (int r = 0; r <= Rmax; r++) {
            if (Pow.lev[r].totalDim() == 0) continue;
            Coinv cv = coinvariants(A.lev[t], A.act[t], Pow.lev[r], Pow.leftGens[r], degHi);
            if (cv.C.totalDim() == 0) continue;

            // carry the right Sigma_r action down to the quotient
            std::vector<DegMap> gens;
            for (int i = 0; i + 1 < r; i++) {
                DegMap amb;
                for (auto& [n, ls] : cv.amb.C.bas) {
                    int dim = (int)ls.size();
                    (void)ls;
                    Mat Gm(dim, dim);
                    for (int p = 0; p < dim; p++) {
                        auto [dg, ix] = cv.amb.ix.at(n, p);
                        auto itR = Pow.rightGens[r][i].find(dg[1]);
                        if (itR == Pow.rightGens[r][i].end()) continue;
                        std::vector<int> tix = ix;
                        for (auto& [row, v] : itR->second.c[ix[1]]) {
                            tix[1] = row;
                            Gm.add((int)cv.amb.ix.indexOf(n, dg, tix), p, v, A.ring);
                        }
                    }
                    amb[n] = std::move(Gm);
                }
                DegMap q;
                for (auto& [n, pm] : cv.proj) {
                    auto itS = cv.sect.find(n);
                    auto itA = amb.find(n);
                    if (itS == cv.sect.end() || itA == amb.end()) continue;
                    q[n] = pm.mul(itA->second.mul(itS->second, A.ring), A.ring);
                }
                gens.push_back(std::move(q));
            }
            out.parts[r].push_back({t, std::move(cv), std::move(gens)});
        }
    }

    // assemble level complexes and block-diagonal actions
    for (int r = 0; r <= Rmax; r++) {
        ChainComplex L = zeroComplex(A.ring);
        std::vector<std::map<int, long>> offs;  // per part: degree -> offset
        for (auto& part : out.parts[r]) {
            std::map<int, long> off;
            for (auto& [n, ls] : part.cv.C.bas) {
                off[n] = L.dim(n);
                std::vector<std::string>& dst = L.bas[n];
                for (auto& l : ls) dst.push_back("t" + std::to_string(part.t) + ":" + l);
            }
            offs.push_back(off);
        }
        std::set<int> degs;
        for (auto& [n, ls] : L.bas) { (void)ls; degs.insert(n); }
        for (int n : degs) {
            Mat d(L.dim(n - 1), L.dim(n));
            bool nz = false;
            for (int pi = 0; pi < (int)out.parts[r].size(); pi++) {
                Mat pd = out.parts[r][pi].cv.C.dmat(n);
                if (pd.rows == 0 || pd.cols == 0) continue;
                long ro = offs[pi].count(n - 1) ? offs[pi][n - 1] : 0;
                long co = offs[pi][n];
                for (int j = 0; j < pd.cols; j++)
                    for (auto& [row, v] : pd.c[j]) {
                        d.set((int)(ro + row), (int)(co + j), v);
                        nz = true;
                    }
            }
            if (nz) L.setDiff(n, d);
        }
        out.seq.lev[r] = L;

        std::vector<DegMap> acts(std::max(0, r - 1));
        for (int i = 0; i + 1 < r; i++) {
            DegMap G;
            for (auto& [n, ls] : L.bas)
                if (!ls.empty()) G[n] = Mat((int)ls.size(), (int)ls.size());
            for (int pi = 0; pi < (int)out.parts[r].size(); pi++) {
                const DegMap& q = out.parts[r][pi].gens[i];
                for (auto& [n, qm] : q) {
                    long off = offs[pi][n];
                    for (int j = 0; j < qm.cols; j++)
                        for (auto& [row, v] : qm.c[j])
                            G[n].set((int)(off + row), (int)(off + j), v);
                }
            }
            acts[i] = std::move(G);
        }
        out.seq.act[r] = std::move(acts);
    }
    return out;
}

}  // namespace ot
