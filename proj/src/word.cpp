#include "otk/word.hpp"

#include <algorithm>
#include <stdexcept>

namespace otk {

std::vector<int> Word::freely_reduce(std::vector<int> v) {
    std::vector<int> out;
    out.reserve(v.size());
    for (int x : v) {
        if (x == 0) throw std::invalid_argument("letter 0 is not a generator");
        if (!out.empty() && out.back() == -x)
            out.pop_back();
        else
            out.push_back(x);
    }
    return out;
}

static std::vector<int> least_rotation(const std::vector<int>& v) {
    if (v.empty()) return v;
    std::vector<int> best = v;
    std::vector<int> cur = v;
    for (std::size_t i = 1; i < v.size(); ++i) {
        std::rotate(cur.begin(), cur.begin() + 1, cur.end());
        if (cur < best) best = cur;
    }
    return best;
}

std::vector<int> Word::cyclic_key() const {
    Word c = cyclic_reduction();
    std::vector<int> a = least_rotation(c.letters());
    std::vector<int> b = least_rotation(c.inverse().letters());
    return std::min(a, b);
}

std::pair<Word, int> Word::primitive_root() const {
    Word c = cyclic_reduction();
    const auto& v = c.letters();
    std::size_t n = v.size();
    if (n == 0) return {Word(), 0};
    for (std::size_t p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        bool periodic = true;
        for (std::size_t i = p; i < n && periodic; ++i) periodic = v[i] == v[i - p];
        if (periodic) {
            Word root;
            std::vector<int> rv(v.begin(), v.begin() + p);
            root = Word(rv);
            // undo the cyclic reduction conjugation
            std::size_t trim = (letters_.size() - n) / 2;
            Word g(std::vector<int>(letters_.begin(), letters_.begin() + trim));
            return {g * root * g.inverse(), static_cast<int>(n / p)};
        }
    }
    return {*this, 1};
}

std::optional<Word> conjugating_word(const Word& u, const Word& w) {
    if (u.trivial() || w.trivial()) {
        if (u.trivial() && w.trivial()) return Word();
        return std::nullopt;
    }
    Word uc = u.cyclic_reduction();
    Word wc = w.cyclic_reduction();
    if (uc.size() != wc.size()) return std::nullopt;
    std::size_t ptrim = (u.size() - uc.size()) / 2;
    std::size_t qtrim = (w.size() - wc.size()) / 2;
    Word p(std::vector<int>(u.letters().begin(), u.letters().begin() + ptrim));
    Word q(std::vector<int>(w.letters().begin(), w.letters().begin() + qtrim));
    // find a rotation of uc matching wc: uc = x y, wc = y x, then
    // mu = q x^-1 p^-1 sends u to w
    std::vector<int> cur = uc.letters();
    for (std::size_t j = 0; j < cur.size(); ++j) {
        if (cur == wc.letters()) {
            Word x(std::vector<int>(uc.letters().begin(), uc.letters().begin() + j));
            Word mu = q * x.inverse() * p.inverse();
            return mu;
        }
        std::rotate(cur.begin(), cur.begin() + 1, cur.end());
    }
    return std::nullopt;
}

std::optional<Word> common_conjugator(const std::vector<std::pair<Word, Word>>& pairs) {
    std::vector<std::pair<Word, Word>> live;
    for (const auto& pr : pairs) {
        if (pr.first.trivial() != pr.second.trivial()) return std::nullopt;
        if (!pr.first.trivial()) live.push_back(pr);
    }
    if (live.empty()) return Word();
    auto mu0 = conjugating_word(live[0].first, live[0].second);
    if (!mu0) return std::nullopt;
    // solutions for the first pair form a coset of the centralizer of the
    // target word, which is generated by its primitive root
    Word r = live[0].second.primitive_root().first;
    std::size_t total = 0;
    for (const auto& pr : live) total += pr.first.size() + pr.second.size();
    total += 2 * mu0->size();
    long bound = static_cast<long>(total / std::max<std::size_t>(1, r.size())) + 2;
    auto works = [&](const Word& mu) {
        for (const auto& pr : live)
            if (pr.first.conjugate(mu) != pr.second) return false;
        return true;
    };
    for (long k = 0; k <= bound; ++k) {
        for (long s : {k, -k}) {
            Word mu = r.pow(static_cast<int>(s)) * *mu0;
            if (works(mu)) return mu;
            if (k == 0) break;
        }
    }
    return std::nullopt;
}

std::string Word::str() const {
    if (letters_.empty()) return "1";
    std::string s;
    for (int x : letters_) {
        if (!s.empty()) s += ' ';
        s += (x > 0 ? "a" : "A") + std::to_string(std::abs(x));
    }
    return s;
}

}  // namespace otk
