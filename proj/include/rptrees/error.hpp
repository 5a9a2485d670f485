#pragma once

#include <stdexcept>
#include <string>

namespace rpt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexError : Error { using Error::Error; };
struct DuplicateEntry : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct EmptyPartition : Error { using Error::Error; };
struct InvalidSplit : Error { using Error::Error; };
struct RelabelError : Error { using Error::Error; };
struct InvalidProjection : Error { using Error::Error; };
struct InvalidTarget : Error { using Error::Error; };
struct Unsupported : Error { using Error::Error; };
struct InvalidStep : Error { using Error::Error; };
struct InvalidFolds : Error { using Error::Error; };
struct InvalidT : Error { using Error::Error; };

struct ParseError : Error {
    long line_no;
    ParseError(const std::string& msg, long line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_no(line) {}
};

}  // namespace rpt
