#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crsir {

/// Base of every error raised by the library. The category decides the CLI exit code.
class Error : public std::runtime_error {
public:
    enum class Category { Usage, Data, Numerical };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] Category category() const noexcept { return category_; }

private:
    Category category_;
};

/// Parameter outside its admissible range.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(Category::Usage, what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(Category::Usage, what) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error(Category::Usage, what) {}
};

class ConstantColumn : public Error {
public:
    explicit ConstantColumn(std::size_t index)
        : Error(Category::Data, "column " + std::to_string(index) + " has zero standard deviation"),
          index_(index) {}

    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class TooFewObservations : public Error {
public:
    explicit TooFewObservations(const std::string& what) : Error(Category::Data, what) {}
};

class TooShort : public Error {
public:
    explicit TooShort(const std::string& what) : Error(Category::Data, what) {}
};

/// Malformed or out-of-domain input file content; carries the 1-based row and column
/// (0 when the problem is not tied to a cell).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(Category::Data, row == 0 ? what
                                         : what + " (row " + std::to_string(row) + ", column " +
                                               std::to_string(column) + ")"),
          row_(row), column_(column) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class UnknownTransformCode : public Error {
public:
    explicit UnknownTransformCode(const std::string& code)
        : Error(Category::Data, "unknown transform code '" + code + "'") {}
};

class RankZero : public Error {
public:
    explicit RankZero(const std::string& what) : Error(Category::Numerical, what) {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& what) : Error(Category::Numerical, what) {}
};

class ConvergenceFailure : public Error {
public:
    explicit ConvergenceFailure(const std::string& what) : Error(Category::Numerical, what) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& what) : Error(Category::Numerical, what) {}
};

class SingularHead : public Error {
public:
    explicit SingularHead(const std::string& what) : Error(Category::Numerical, what) {}
};

}  // namespace crsir
