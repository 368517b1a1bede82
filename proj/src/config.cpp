//! \file config.cpp
