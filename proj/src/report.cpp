//! \file report.cpp
