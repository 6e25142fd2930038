package com.example;

public enum Color {
    RED("#f00"),
    GREEN("#0f0") {
        @Override
        boolean isWarm() {
            return false;
        }
    },
    BLUE("#00f");

    private final String hex;

    Color(String hex) {
        this.hex = hex;
    }

    boolean isWarm() {
        return this == RED;
    }

    public String hex() {
        return hex;
    }
}
