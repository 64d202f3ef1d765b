#pragma once

#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace otk {

// Freely reduced word in F_n over a fixed basis a_1,...,a_n.
// Letters are signed generator indices: +i means a_i, -i means a_i^{-1}.
// The empty word is the identity.
class Word {
public:
    Word() = default;
    explicit Word(std::vector<int> letters) : letters_(freely_reduce(std::move(letters))) {}
    static Word generator(int i) { return Word(std::vector<int>{i}); }

    const std::vector<int>& letters() const { return letters_; }
    bool trivial() const { return letters_.empty(); }
    std::size_t size() const { return letters_.size(); }

    Word inverse() const {
        std::vector<int> out;
        out.reserve(letters_.size());
        for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.push_back(-*it);
        Word w;
        w.letters_ = std::move(out);  // inverse of reduced word is reduced
        return w;
    }

    Word operator*(const Word& rhs) const {
        std::vector<int> out = letters_;
        for (int x : rhs.letters_) {
            if (!out.empty() && out.back() == -x)
                out.pop_back();
            else
                out.push_back(x);
        }
        Word w;
        w.letters_ = std::move(out);
        return w;
    }

    Word pow(int k) const {
        Word base = k >= 0 ? *this : inverse();
        Word acc;
        for (int i = 0; i < std::abs(k); ++i) acc = acc * base;
        return acc;
    }

    Word conjugate(const Word& g) const { return g * (*this) * g.inverse(); }

    // Removes matching first/last letters; the result represents the same
    // conjugacy class with minimal length.
    Word cyclic_reduction() const {
        std::vector<int> v = letters_;
        std::size_t i = 0, j = v.size();
        while (j > i + 1 && v[i] == -v[j - 1]) {
            ++i;
            --j;
        }
        Word w;
        w.letters_.assign(v.begin() + i, v.begin() + j);
        return w;
    }

    // Lexicographically least rotation of the cyclic reduction, also
    // minimized against the inverse word: a canonical conjugacy-class key
    // invariant under conjugation and inversion.
    std::vector<int> cyclic_key() const;

    // Largest k with *this == r^k for some r; returns (root, k).
    std::pair<Word, int> primitive_root() const;

    bool operator==(const Word& o) const { return letters_ == o.letters_; }
    bool operator!=(const Word& o) const { return letters_ != o.letters_; }
    bool operator<(const Word& o) const { return letters_ < o.letters_; }

    int max_generator() const {
        int m = 0;
        for (int x : letters_) m = std::max(m, std::abs(x));
        return m;
    }

    std::string str() const;

    static std::vector<int> freely_reduce(std::vector<int> v);

private:
    std::vector<int> letters_;
};

// some mu with mu u mu^-1 == w, when u and w are conjugate
std::optional<Word> conjugating_word(const Word& u, const Word& w);

// a single mu with mu u mu^-1 == w for every pair (u, w); the centralizer of
// the first nontrivial u is cyclic, so only root-power corrections of one
// candidate need checking
std::optional<Word> common_conjugator(const std::vector<std::pair<Word, Word>>& pairs);

}  // namespace otk
