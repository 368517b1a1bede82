//! \file ledger.cpp
