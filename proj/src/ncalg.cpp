#include "freestein/ncalg.hpp"

#include <algorithm>
#include <sstream>

namespace freestein {

namespace {

// Expands the product of two B-combinations.
BCombination multiply(const BAlgebra& b, const BCombination& x, const BCombination& y) {
  std::map<int, QComplex> acc;
  for (const auto& [i, ci] : x) {
    for (const auto& [j, cj] : y) {
      for (const auto& [k, ck] : b.product(i, j)) acc[k] += ci * cj * ck;
    }
  }
  BCombination out;
  for (auto& [k, c] : acc)
    if (!c.is_zero()) out.emplace_back(k, std::move(c));
  return out;
}

BCombination star_of(const BAlgebra& b, const BCombination& x) {
  std::map<int, QComplex> acc;
  for (const auto& [i, ci] : x) {
    for (const auto& [k, ck] : b.star(i)) acc[k] += ci.conj() * ck;
  }
  BCombination out;
  for (auto& [k, c] : acc)
    if (!c.is_zero()) out.emplace_back(k, std::move(c));
  return out;
}

BCombination basis_element(int k) { return {{k, QComplex(1)}}; }

bool same_combination(BCombination a, BCombination b) {
  auto by_index = [](const auto& x, const auto& y) { return x.first < y.first; };
  std::sort(a.begin(), a.end(), by_index);
  std::sort(b.begin(), b.end(), by_index);
  std::erase_if(a, [](const auto& e) { return e.second.is_zero(); });
  std::erase_if(b, [](const auto& e) { return e.second.is_zero(); });
  return a == b;
}

}  // namespace

BAlgebra::BAlgebra(int dim, std::vector<BCombination> products, std::vector<BCombination> involution,
                   BCombination unit)
    : dim_(dim),
      products_(std::move(products)),
      involution_(std::move(involution)),
      unit_(std::move(unit)) {
  if (dim_ < 1) throw StructuralError("B must have positive dimension");
  if (static_cast<int>(products_.size()) != dim_ * dim_) {
    throw StructuralError("B needs dim^2 structure-constant rows");
  }
  if (static_cast<int>(involution_.size()) != dim_) {
    throw StructuralError("B involution needs one row per basis element");
  }
  auto check_indices = [this](const BCombination& c) {
    for (const auto& [k, v] : c) {
      if (k < 0 || k >= dim_) throw StructuralError("B basis index out of range");
    }
  };
  for (const auto& c : products_) check_indices(c);
  for (const auto& c : involution_) check_indices(c);
  check_indices(unit_);
  scalar_ = dim_ == 1 && same_combination(products_[0], basis_element(0)) &&
            same_combination(unit_, basis_element(0)) &&
            same_combination(involution_[0], basis_element(0));
}

std::shared_ptr<const BAlgebra> BAlgebra::scalars() {
  static const auto c = std::make_shared<const BAlgebra>(
      1, std::vector<BCombination>{basis_element(0)}, std::vector<BCombination>{basis_element(0)},
      basis_element(0));
  return c;
}

void BAlgebra::validate() const {
  for (int a = 0; a < dim_; ++a) {
    const BCombination ea = basis_element(a);
    if (!same_combination(multiply(*this, unit_, ea), ea) ||
        !same_combination(multiply(*this, ea, unit_), ea)) {
      throw StructuralError("B unit element is not a two-sided unit");
    }
    if (!same_combination(star_of(*this, star(a)), ea)) {
      throw StructuralError("B involution does not square to the identity");
    }
    for (int b = 0; b < dim_; ++b) {
      const BCombination eb = basis_element(b);
      if (!same_combination(star_of(*this, product(a, b)),
                            multiply(*this, star(b), star(a)))) {
        throw StructuralError("B involution is not an anti-automorphism");
      }
      for (int c = 0; c < dim_; ++c) {
        const BCombination ec = basis_element(c);
        if (!same_combination(multiply(*this, product(a, b), ec),
                              multiply(*this, ea, product(b, c)))) {
          throw StructuralError("B structure constants are not associative");
        }
      }
    }
  }
}

bool operator==(const BAlgebra& a, const BAlgebra& b) {
  return a.dim_ == b.dim_ && a.products_ == b.products_ && a.involution_ == b.involution_ &&
         a.unit_ == b.unit_;
}

GeneratorSystem::GeneratorSystem(int n, std::vector<int> star, std::shared_ptr<const BAlgebra> b,
                                 int cap)
    : n_(n), star_(std::move(star)), b_(b ? std::move(b) : BAlgebra::scalars()), cap_(cap) {
  if (n_ < 1) throw StructuralError("a generator system needs at least one indeterminate");
  if (cap_ < 1) throw StructuralError("degree cap must be positive");
  if (star_.empty()) {
    star_.resize(n_);
    for (int i = 0; i < n_; ++i) star_[i] = i;
  }
  if (static_cast<int>(star_.size()) != n_) throw StructuralError("star pairing has wrong length");
  for (int i = 0; i < n_; ++i) {
    if (star_[i] < 0 || star_[i] >= n_ || star_[star_[i]] != i) {
      throw StructuralError("star pairing is not an involution");
    }
  }
}

bool GeneratorSystem::compatible(const GeneratorSystem& other) const {
  if (this == &other) return true;
  return n_ == other.n_ && star_ == other.star_ && cap_ == other.cap_ &&
         (b_ == other.b_ || *b_ == *other.b_);
}

SystemPtr make_system(int n, std::vector<int> star, std::shared_ptr<const BAlgebra> b, int cap) {
  return std::make_shared<const GeneratorSystem>(n, std::move(star), std::move(b), cap);
}

void check_same_system(const SystemPtr& a, const SystemPtr& b) {
  if (a == b) return;
  if (!a || !b || !a->compatible(*b)) {
    throw StructuralError("operands belong to different generator systems");
  }
}

Word::Word(std::vector<int> letters_, std::vector<int> slots_)
    : letters(std::move(letters_)), slots(std::move(slots_)) {
  if (slots.size() != letters.size() + 1) {
    throw StructuralError("a word of degree d needs d + 1 B-slots");
  }
}

Word Word::of_letters(std::vector<int> letters_) {
  std::vector<int> slots_(letters_.size() + 1, 0);
  return Word(std::move(letters_), std::move(slots_));
}

std::strong_ordering operator<=>(const Word& a, const Word& b) {
  if (auto c = a.letters.size() <=> b.letters.size(); c != 0) return c;
  if (auto c = a.letters <=> b.letters; c != 0) return c;
  return a.slots <=> b.slots;
}

std::size_t WordHash::operator()(const Word& w) const noexcept {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (int l : w.letters) mix(static_cast<std::size_t>(l));
  mix(0xffffu);
  for (int s : w.slots) mix(static_cast<std::size_t>(s));
  return h;
}

void multiply_words(const BAlgebra& b, const Word& u, const Word& v,
                    const std::function<void(Word&&, const QComplex&)>& emit) {
  std::vector<int> letters;
  letters.reserve(u.letters.size() + v.letters.size());
  letters.insert(letters.end(), u.letters.begin(), u.letters.end());
  letters.insert(letters.end(), v.letters.begin(), v.letters.end());
  if (b.is_scalar()) {
    static const QComplex one(1);
    emit(Word::of_letters(std::move(letters)), one);
    return;
  }
  for (const auto& [k, c] : b.product(u.slots.back(), v.slots.front())) {
    std::vector<int> slots(u.slots.begin(), u.slots.end() - 1);
    slots.push_back(k);
    slots.insert(slots.end(), v.slots.begin() + 1, v.slots.end());
    emit(Word(letters, std::move(slots)), c);
  }
}

void adjoint_word(const GeneratorSystem& sys, const Word& w,
                  const std::function<void(Word&&, const QComplex&)>& emit) {
  std::vector<int> letters(w.letters.rbegin(), w.letters.rend());
  for (int& l : letters) l = sys.star(l);
  const BAlgebra& b = sys.b();
  if (b.is_scalar()) {
    static const QComplex one(1);
    emit(Word::of_letters(std::move(letters)), one);
    return;
  }
  const std::size_t m = w.slots.size();
  std::vector<int> slots(m);
  // Cartesian product over the starred slots, taken in reverse order.
  std::function<void(std::size_t, const QComplex&)> rec = [&](std::size_t pos, const QComplex& c) {
    if (pos == m) {
      emit(Word(letters, slots), c);
      return;
    }
    for (const auto& [k, ck] : b.star(w.slots[m - 1 - pos])) {
      slots[pos] = k;
      rec(pos + 1, c * ck);
    }
  };
  rec(0, QComplex(1));
}

std::vector<Word> enumerate_words(const GeneratorSystem& sys, int max_degree, int min_degree) {
  std::vector<Word> out;
  const int n = sys.size();
  const int dim = sys.b().dim();
  for (int d = std::max(0, min_degree); d <= max_degree; ++d) {
    std::vector<int> letters(d, 0);
    while (true) {
      std::vector<int> slots(d + 1, 0);
      while (true) {
        out.emplace_back(letters, slots);
        int k = d;
        while (k >= 0 && ++slots[k] == dim) slots[k--] = 0;
        if (k < 0) break;
      }
      int k = d - 1;
      while (k >= 0 && ++letters[k] == n) letters[k--] = 0;
      if (k < 0) break;
    }
  }
  return out;
}

PolyTuple generator_tuple(const SystemPtr& sys) {
  PolyTuple out;
  for (int i = 0; i < sys->size(); ++i) out.push_back(Poly::generator(sys, i));
  return out;
}

std::string word_string(const GeneratorSystem& sys, const Word& w) {
  std::ostringstream os;
  const bool show_b = sys.has_b();
  bool first = true;
  auto put = [&](const std::string& s) {
    if (!first) os << ' ';
    os << s;
    first = false;
  };
  for (int k = 0; k <= w.degree(); ++k) {
    if (show_b) put("b" + std::to_string(w.slots[k]));
    if (k < w.degree()) put("t" + std::to_string(w.letters[k] + 1));
  }
  if (first) return "1";
  return os.str();
}

namespace {

void append_term(std::ostringstream& os, bool& first, const QComplex& c, const std::string& body) {
  if (!first) os << " + ";
  first = false;
  if (c == QComplex(1) && body != "1") {
    os << body;
  } else if (body == "1") {
    os << c.to_string();
  } else {
    os << c.to_string() << ' ' << body;
  }
}

}  // namespace

std::string to_string(const Poly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : p.terms()) append_term(os, first, c, word_string(*p.system(), w));
  return os.str();
}

std::string to_string(const Tensor& t) {
  if (t.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, c] : t.terms()) {
    append_term(os, first, c,
                "(" + word_string(*t.system(), k.first) + ") x (" +
                    word_string(*t.system(), k.second) + ")");
  }
  return os.str();
}

}  // namespace freestein
