package com.example;

import static org.junit.Assert.assertEquals;

import org.junit.Test;

public class CalculatorTest {
    @Test
    public void addsNumbers() {
        Calculator c = new Calculator();
        assertEquals(4, c.add(2, 2));
    }

    @Test
    public void subtracts() {
        assertEquals(0, new Calculator().sub(2, 2));
    }
}
