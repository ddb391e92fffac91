#pragma once

#include <stdexcept>
#include <string>

namespace cantorlab {

// Precondition and schema failures (CLI exit code 2).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numeric breakdowns such as an exhausted schedule (CLI exit code 3).
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScheduleExhausted : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

}  // namespace cantorlab
