"""Job execution-time prediction with OLS and epsilon-SVR."""
