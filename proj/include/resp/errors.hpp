#ifndef RESP_ERRORS_HPP
#define RESP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace resp {

// Exit-code mapping used by the CLI: UsageError -> 2, DataError -> 3,
// NumericError -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

// Window has too few beats for EDR extraction; callers flag and exclude the
// window instead of fabricating a waveform.
class InsufficientBeats : public DataError {
public:
    using DataError::DataError;
};

class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace resp

#endif
