#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gambel {

// Root of everything the library throws on purpose.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// bad parameters, bad grids, bad prior strings
class domain_error : public error {
public:
    using error::error;
};

// numerical failures
class numerical_error : public error {
public:
    using error::error;
};

class pole_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class convergence_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class bracket_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class no_interior_max_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class moment_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class sampler_error : public error {
public:
    sampler_error(const std::string& what, std::size_t iteration = 0)
        : error(what), iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

class infeasible_error : public sampler_error {
public:
    using sampler_error::sampler_error;
};

class rank_error : public sampler_error {
public:
    using sampler_error::sampler_error;
};

class insufficient_draws_error : public sampler_error {
public:
    using sampler_error::sampler_error;
};

} // namespace gambel
