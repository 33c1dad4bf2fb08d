#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

// Base class for every error the simulator raises on purpose.
class FedError : public std::runtime_error {
public:
    explicit FedError(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public FedError {
public:
    explicit DimensionError(const std::string& msg) : FedError(msg) {}
};

class PartitionError : public FedError {
public:
    explicit PartitionError(const std::string& msg) : FedError(msg) {}
};

class FormatError : public FedError {
public:
    explicit FormatError(const std::string& msg) : FedError(msg) {}
};

class GradientSetTooSmall : public FedError {
public:
    explicit GradientSetTooSmall(const std::string& msg) : FedError(msg) {}
};

class SplitError : public FedError {
public:
    explicit SplitError(const std::string& msg) : FedError(msg) {}
};

class AggregationError : public FedError {
public:
    explicit AggregationError(const std::string& msg) : FedError(msg) {}
};

class ZeroVectorError : public FedError {
public:
    explicit ZeroVectorError(const std::string& msg) : FedError(msg) {}
};

class ConfigError : public FedError {
public:
    explicit ConfigError(const std::string& msg) : FedError(msg) {}
};

} // namespace fedsim
