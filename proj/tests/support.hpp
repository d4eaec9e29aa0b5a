#pragma once

#include <gtest/gtest.h>

#include "dupinlab/error.hpp"
#include "oracles.hpp"

#define EXPECT_DUPIN_ERROR(stmt, err_code)                                                \
  do {                                                                                    \
    try {                                                                                 \
      stmt;                                                                               \
      ADD_FAILURE() << "expected " << ::dupinlab::to_string(err_code) << ", nothing thrown"; \
    } catch (const ::dupinlab::Error& e) {                                                \
      EXPECT_EQ(e.code(), err_code) << e.what();                                          \
    }                                                                                     \
  } while (0)

